#include <fstream>
#include <iostream>
#include <iterator>

#include "CLI11.hpp"
#include "biconnect/cli.hpp"

namespace {

struct Sub {
  const char* name;
  const char* help;
  std::size_t inputs;  // positional inputs reading "-" means stdin
};

const Sub kSubs[] = {
    {"validate", "structural checks on a four-graph configuration", 1},
    {"pf", "Perron-Frobenius weights of a configuration", 1},
    {"check-biunitary", "unitarity of a connection and of its prime renormalization", 1},
    {"renorm", "renormalize a connection (--mode prime|bar|bar-prime)", 1},
    {"product", "vertical product of two connections", 2},
    {"dsum", "direct sum of two connections", 2},
    {"irreducible", "dimension of the self-intertwiner space", 1},
    {"flat-fields", "basis of flat fields for a connection or closed word", 1},
    {"theorem-verify", "half-flat / flat / half-zipper / zipper agreement", 1},
    {"action-check", "well-definedness of the open string action", 1},
    {"example", "emit a built-in configuration or connection (--id)", 0},
};

}  // namespace

int main(int argc, char** argv) {
  biconnect::cli::CommandRequest req;
  std::string out;
  CLI::App app{"Bi-unitary connections: weights, renormalizations, flat fields and zippers"};
  app.require_subcommand(1);
  app.add_option("--tol", req.tol, "numerical tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", req.seed, "seed for random sampling");
  app.add_option("--out", out, "write the JSON report to this file");
  app.add_flag("--parallel", req.parallel, "spread block checks over threads");

  std::map<std::string, std::vector<std::string>> positional;
  std::map<std::string, std::string> opts;
  for (const auto& s : kSubs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    if (s.inputs > 0) sub->add_option("inputs", positional[s.name], "JSON input files ('-' for stdin)")->expected(0, s.inputs);
    const std::string name = s.name;
    if (name == "renorm") sub->add_option("--mode", opts["mode"], "prime, bar or bar-prime");
    if (name == "example") sub->add_option("--id", opts["id"], "example1, example2, hadamard:N, parallel:N, fourier:N, identity:N");
    if (name == "theorem-verify") {
      sub->add_option("--field", opts["field"], "field JSON; otherwise sample identity, basis and random fields");
      sub->add_option("--samples", opts["samples"], "number of random fields (default 100)");
    }
    if (name == "action-check") {
      sub->add_option("--field", opts["field"], "field JSON; otherwise identity and the flat basis");
      sub->add_option("--level", opts["level"], "highest level to check (default 3)");
      sub->add_option("--star0", opts["star0"], "label of the base vertex in V0");
      sub->add_option("--star1", opts["star1"], "label of the base vertex in V1");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : biconnect::cli::kInputError;
  }

  const auto* sub = app.get_subcommands().front();
  req.command = sub->get_name();
  req.inputs = positional[req.command];
  const std::size_t want = [&] {
    for (const auto& s : kSubs)
      if (req.command == s.name) return s.inputs;
    return std::size_t{0};
  }();
  if (req.inputs.empty() && want > 0) req.inputs.push_back("-");
  if (want == 2 && req.inputs.size() == 1) {
    std::cerr << req.command << ": expects two inputs\n";
    return biconnect::cli::kInputError;
  }
  for (const auto& [k, v] : opts)
    if (!v.empty()) req.options[k] = v;
  for (const auto& in : req.inputs)
    if (in == "-") {
      req.stdin_text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
      break;
    }

  const auto result = biconnect::cli::run(req);
  if (out.empty()) {
    std::cout << result.report;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write '" << out << "'\n";
      return biconnect::cli::kInputError;
    }
    f << result.report;
  }
  std::cerr << result.summary << "\n";
  return result.exit_code;
}
