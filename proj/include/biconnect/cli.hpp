#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biconnect/io.hpp"

namespace biconnect::cli {

using io::json;

enum ExitCode : int { kPass = 0, kFail = 1, kDisagreement = 2, kInputError = 3 };

struct CommandRequest {
  std::string command;
  std::vector<std::string> inputs;  // "-" reads the stdin text below
  std::string output;               // empty: report goes to stdout
  double tol = kDefaultCheckTol;
  std::uint64_t seed = 1;
  bool parallel = false;
  std::map<std::string, std::string> options;  // id, mode, field, level, samples, star0, star1
  std::string stdin_text;
};

struct CommandResult {
  int exit_code = kPass;
  std::string report;   // JSON text
  std::string summary;  // one human-readable line
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate",  "pf",           "check-biunitary", "renorm",
                                              "product",   "dsum",         "irreducible",     "flat-fields",
                                              "theorem-verify", "action-check", "example"};
  return names;
}

namespace detail {

inline json input(const CommandRequest& req, std::size_t i) {
  if (i >= req.inputs.size()) throw InputError(req.command + ": missing input #" + std::to_string(i + 1));
  if (req.inputs[i] == "-") return io::parse(req.stdin_text, "<stdin>");
  return io::load_file(req.inputs[i]);
}

inline std::string option(const CommandRequest& req, const std::string& key, const std::string& fallback = {}) {
  const auto it = req.options.find(key);
  return it == req.options.end() ? fallback : it->second;
}

inline std::size_t option_size(const CommandRequest& req, const std::string& key, std::size_t fallback) {
  const auto s = option(req, key);
  if (s.empty()) return fallback;
  std::size_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw InputError("--" + key + " expects a nonnegative integer");
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

inline json header(const CommandRequest& req) {
  return {{"schema", io::kReportSchema}, {"command", req.command}, {"tol", req.tol}, {"seed", req.seed}};
}

inline FourGraphConfig config_input(const CommandRequest& req, std::size_t i) {
  const auto j = input(req, i);
  // A connection file also carries a configuration.
  return io::config_from_json(j.contains("config") ? j.at("config") : j).config;
}

inline std::optional<StringField> field_option(const CommandRequest& req, const BipartiteGraph& g) {
  const auto path = option(req, "field");
  if (path.empty()) return std::nullopt;
  return io::field_from_json(io::load_file(path), g);
}

inline std::size_t star(const CommandRequest& req, const std::string& key, const std::vector<std::string>& labels) {
  const auto s = option(req, key);
  if (s.empty()) return 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == s) return i;
  throw InputError("--" + key + ": no vertex labelled '" + s + "'");
}

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------

inline CommandResult cmd_validate(const CommandRequest& req) {
  const auto cfg = config_input(req, 0);
  const auto r = validate_config(cfg);
  auto j = header(req);
  j["report"] = io::report_to_json(r);
  return {r.passed() ? kPass : kFail, io::dump(j), std::string("validate: ") + (r.passed() ? "pass" : "fail") +
                                                     (r.has_warnings() ? " (with warnings)" : "")};
}

inline CommandResult cmd_pf(const CommandRequest& req) {
  const auto cfg = config_input(req, 0);
  auto j = header(req);
  try {
    const auto pf = compute_pf(cfg);
    j["pf"] = io::pf_to_json(pf);
    j["residuals"] = balance_residuals(cfg, pf);
    return {kPass, io::dump(j), "pf: beta0=" + fmt(pf.beta0) + " beta1=" + fmt(pf.beta1)};
  } catch (const InconsistencyError& e) {
    j["error"] = e.what();
    j["worst_residual"] = e.worst_residual();
    return {kFail, io::dump(j), std::string("pf: ") + e.what()};
  } catch (const ConvergenceError& e) {
    j["error"] = e.what();
    return {kFail, io::dump(j), std::string("pf: ") + e.what()};
  }
}

inline CommandResult cmd_check_biunitary(const CommandRequest& req) {
  const auto w = io::connection_from_json(input(req, 0));
  const auto r = check_biunitarity(w, req.tol, req.parallel);
  auto j = header(req);
  j["report"] = io::report_to_json(r);
  j["worst_defect"] = r.worst_defect();
  return {r.passed() ? kPass : kFail, io::dump(j),
          std::string("check-biunitary: ") + (r.passed() ? "pass" : "fail") + " defect=" + fmt(r.worst_defect())};
}

inline CommandResult cmd_renorm(const CommandRequest& req) {
  const auto w = io::connection_from_json(input(req, 0));
  const auto mode = parse_renormalization(option(req, "mode", "prime"));
  const auto out = renormalize(w, mode);
  return {kPass, io::dump(io::connection_to_json(out)), std::string("renorm: ") + to_string(mode)};
}

inline CommandResult cmd_product(const CommandRequest& req) {
  const auto a = io::connection_from_json(input(req, 0));
  const auto b = io::connection_from_json(input(req, 1));
  const auto p = product(a, b, req.tol);
  return {kPass, io::dump(io::connection_to_json(p)),
          "product: " + std::to_string(p.values().size()) + " nonzero cells, beta1=" + fmt(p.pf().beta1)};
}

inline CommandResult cmd_dsum(const CommandRequest& req) {
  const auto a = io::connection_from_json(input(req, 0));
  const auto b = io::connection_from_json(input(req, 1));
  const auto s = direct_sum(a, b);
  return {kPass, io::dump(io::connection_to_json(s)), "dsum: " + std::to_string(s.values().size()) + " nonzero cells"};
}

inline CommandResult cmd_irreducible(const CommandRequest& req) {
  const auto w = io::connection_from_json(input(req, 0));
  const auto dim = intertwiner_space(w, w, req.tol).size();
  auto j = header(req);
  j["intertwiner_dimension"] = dim;
  j["irreducible"] = dim == 1;
  return {dim == 1 ? kPass : kFail, io::dump(j),
          std::string("irreducible: ") + (dim == 1 ? "yes" : "no") + " (dimension " + std::to_string(dim) + ")"};
}

inline CommandResult cmd_flat_fields(const CommandRequest& req) {
  const auto word = io::word_from_json(input(req, 0));
  const auto basis = solve_flat_fields(word, req.tol);
  auto j = header(req);
  j["dimension"] = basis.size();
  json arr = json::array();
  for (const auto& f : basis) {
    auto fj = io::field_to_json(f);
    fj["flatness_defect"] = check_flatness(f, word, req.tol).defect;
    arr.push_back(fj);
  }
  j["basis"] = arr;
  return {kPass, io::dump(j), "flat-fields: dimension " + std::to_string(basis.size())};
}

inline CommandResult cmd_theorem_verify(const CommandRequest& req) {
  const auto word = io::word_from_json(input(req, 0));
  std::vector<std::pair<std::string, StringField>> samples;
  if (auto f = field_option(req, word.left_graph())) {
    samples.emplace_back("field", *f);
  } else {
    samples.emplace_back("identity", identity_field(word.left_graph()));
    const auto basis = solve_flat_fields(word, req.tol);
    for (std::size_t i = 0; i < basis.size(); ++i) samples.emplace_back("basis-" + std::to_string(i), basis[i]);
    Rng rng(req.seed);
    const auto n = option_size(req, "samples", 100);
    for (std::size_t i = 0; i < n; ++i)
      samples.emplace_back("random-" + std::to_string(i), random_field(word.left_graph(), rng));
  }
  auto j = header(req);
  json arr = json::array();
  bool all_agree = true, all_pass = true, all_fail = true;
  for (const auto& [name, f] : samples) {
    const auto r = verify_theorem(f, word, req.tol);
    auto rj = io::theorem_to_json(r);
    rj["sample"] = name;
    arr.push_back(rj);
    all_agree = all_agree && r.agreement;
    all_pass = all_pass && r.agreement && r.flat;
    all_fail = all_fail && r.agreement && !r.flat;
  }
  j["samples"] = arr;
  j["all_agree"] = all_agree;
  int code = kPass;
  if (!all_agree) code = kDisagreement;
  else if (samples.size() == 1 && all_fail) code = kFail;
  return {code, io::dump(j),
          "theorem-verify: " + std::to_string(samples.size()) + " samples, " +
              (all_agree ? (samples.size() == 1 ? (all_pass ? "all four hold" : "all four fail") : "all agree")
                         : "DISAGREEMENT")};
}

inline CommandResult cmd_action_check(const CommandRequest& req) {
  const auto w = io::connection_from_json(input(req, 0));
  const auto& g1 = w.config().graph(GraphSlot::G1);
  std::vector<std::pair<std::string, StringField>> fields;
  if (auto f = field_option(req, g1)) {
    fields.emplace_back("field", *f);
  } else {
    fields.emplace_back("identity", identity_field(g1));
    const auto basis = solve_flat_fields(closed_word(w), req.tol);
    for (std::size_t i = 0; i < basis.size(); ++i) fields.emplace_back("basis-" + std::to_string(i), basis[i]);
  }
  const auto levels = option_size(req, "level", 3);
  const auto s0 = star(req, "star0", w.config().layers[index_of(Layer::V0)]);
  const auto s1 = star(req, "star1", w.config().layers[index_of(Layer::V1)]);
  auto j = header(req);
  json arr = json::array();
  double worst = 0.0;
  for (const auto& [name, f] : fields) {
    json per = json::array();
    for (std::size_t level = 0; level <= levels; ++level) {
      const double d = check_action_well_defined(f, w, level, req.tol, s0, s1);
      per.push_back(d);
      worst = std::max(worst, d);
    }
    arr.push_back({{"field", name}, {"defects", per}});
  }
  j["levels"] = levels;
  j["results"] = arr;
  j["worst_defect"] = worst;
  const bool ok = worst < req.tol;
  return {ok ? kPass : kFail, io::dump(j),
          std::string("action-check: ") + (ok ? "well defined" : "not well defined") + " worst=" + fmt(worst)};
}

inline CommandResult cmd_example(const CommandRequest& req) {
  const auto id = option(req, "id");
  if (id.empty()) throw InputError("example: --id is required");
  auto sized = [&](const std::string& prefix) -> std::optional<std::size_t> {
    if (id.rfind(prefix, 0) != 0) return std::nullopt;
    CommandRequest tmp;
    tmp.options["n"] = id.substr(prefix.size());
    const auto n = option_size(tmp, "n", 0);
    if (n < 2) throw InputError("example: size must be at least 2");
    return n;
  };
  if (auto n = sized("fourier:"))
    return {kPass, io::dump(io::connection_to_json(hadamard_connection(fourier_matrix(*n)))), "example: " + id};
  if (auto n = sized("identity:")) {
    const auto m = static_cast<Eigen::Index>(*n);
    return {kPass, io::dump(io::connection_to_json(hadamard_connection(MatrixC::Identity(m, m)))), "example: " + id};
  }
  const auto cfg = builtin_example(id);
  return {kPass, io::dump(io::config_to_json(cfg)), "example: " + id};
}

}  // namespace detail

/// Executes one command. Library errors on bad input map to exit code 3.
inline CommandResult run(const CommandRequest& req) {
  static const std::map<std::string, std::function<CommandResult(const CommandRequest&)>> table{
      {"validate", detail::cmd_validate},
      {"pf", detail::cmd_pf},
      {"check-biunitary", detail::cmd_check_biunitary},
      {"renorm", detail::cmd_renorm},
      {"product", detail::cmd_product},
      {"dsum", detail::cmd_dsum},
      {"irreducible", detail::cmd_irreducible},
      {"flat-fields", detail::cmd_flat_fields},
      {"theorem-verify", detail::cmd_theorem_verify},
      {"action-check", detail::cmd_action_check},
      {"example", detail::cmd_example},
  };
  const auto it = table.find(req.command);
  auto fail = [&](const std::string& kind, const std::string& msg) {
    auto j = detail::header(req);
    j["error"] = {{"kind", kind}, {"message", msg}};
    return CommandResult{kInputError, io::dump(j), req.command + ": " + kind + ": " + msg};
  };
  if (it == table.end()) return fail("input", "unknown command '" + req.command + "'");
  try {
    return it->second(req);
  } catch (const InputError& e) {
    return fail("input", e.what());
  } catch (const StructuralError& e) {
    return fail("structure", e.what());
  } catch (const MismatchError& e) {
    return fail("mismatch", e.what());
  } catch (const CapExceededError& e) {
    return fail("cap", e.what());
  } catch (const Error& e) {
    return fail("error", e.what());
  } catch (const io::json::exception& e) {
    return fail("input", e.what());
  }
}

}  // namespace biconnect::cli
