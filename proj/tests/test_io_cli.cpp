#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "biconnect/cli.hpp"

using namespace biconnect;

namespace {

const std::string kFixtures = BICONNECT_FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

struct Run {
  int code;
  std::string out;
};

// Runs the CLI binary through the shell; stderr is discarded.
Run shell(const std::string& args) {
  const std::string cmd = std::string(BICONNECT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, {}};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

cli::CommandResult run(const std::string& command, std::vector<std::string> inputs,
                       std::map<std::string, std::string> options = {}) {
  cli::CommandRequest req;
  req.command = command;
  req.inputs = std::move(inputs);
  req.options = std::move(options);
  return cli::run(req);
}

}  // namespace

TEST(Io, ConfigRoundTrip) {
  for (const auto* id : {"example1", "example2", "hadamard:3", "parallel:2"}) {
    const auto cfg = builtin_example(id);
    const auto pf = compute_pf(cfg);
    const auto back = io::config_from_json(io::parse(io::dump(io::config_to_json(cfg, pf))));
    for (auto s : kSlots) EXPECT_TRUE(back.config.graph(s).same_structure(cfg.graph(s))) << id;
    EXPECT_EQ(back.config.layers, cfg.layers);
    ASSERT_TRUE(back.pf.has_value());
    EXPECT_NEAR(back.pf->beta0, pf.beta0, 1e-15);
    EXPECT_NEAR(back.pf->beta1, pf.beta1, 1e-15);
  }
}

TEST(Io, ConnectionRoundTripIsExact) {
  Rng rng(5);
  const auto w0 = hadamard_connection(fourier_matrix(3));
  const auto w = gauge_transform(w0, random_gauge(w0.config(), rng));
  const auto text = io::dump(io::connection_to_json(w));
  const auto back = io::connection_from_json(io::parse(text));
  ASSERT_EQ(back.values().size(), w.values().size());
  for (const auto& [k, v] : w.values()) EXPECT_LT(std::abs(back(k) - v), kRoundTripTol);
  EXPECT_EQ(io::dump(io::connection_to_json(back)), text);
}

TEST(Io, TensorInputConvertsToConnection) {
  const auto w = hadamard_connection(fourier_matrix(2));
  const auto back = io::connection_from_json(io::tensor_to_json(connection_to_tensor(w)));
  for (const auto& [k, v] : w.values()) EXPECT_LT(std::abs(back(k) - v), kRoundTripTol);
}

TEST(Io, FieldRoundTrip) {
  Rng rng(8);
  const auto g = parallel_config(3).graph(GraphSlot::G1);
  const auto f = random_field(g, rng);
  const auto back = io::field_from_json(io::parse(io::dump(io::field_to_json(f))), g);
  EXPECT_LT(field_distance(back, f), kRoundTripTol);
}

TEST(Io, FieldRejectsNonParallelPair) {
  const auto g = hadamard_config(2).graph(GraphSlot::G1);
  const auto j = io::parse(R"({"coeffs":[{"rho1":0,"rho2":1,"re":1,"im":0}]})");
  EXPECT_THROW(io::field_from_json(j, g), StructuralError);
}

TEST(Io, ParseErrorReportsLocation) {
  try {
    io::parse("{\n  \"a\": [1, 2,\n}", "sample.json");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("sample.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Io, NonMatchingCellRejected) {
  EXPECT_THROW(io::connection_from_json(io::load_file(fixture("bad_cell.json"))), StructuralError);
}

TEST(Io, DuplicateCellRejected) {
  const auto j = io::parse(R"({"config":"hadamard:2","values":[
    {"cell":[0,0,0,0],"re":1,"im":0},{"cell":[0,0,0,0],"re":1,"im":0}]})");
  EXPECT_THROW(io::connection_from_json(j), StructuralError);
}

TEST(Io, MissingFileIsInputError) {
  EXPECT_THROW(io::load_file(fixture("does-not-exist.json")), InputError);
}

TEST(Cli, PfOnExample2) {
  const auto r = run("pf", {fixture("example2.json")});
  ASSERT_EQ(r.exit_code, cli::kPass) << r.summary;
  const auto j = io::parse(r.report);
  EXPECT_NEAR(j["pf"]["beta0"].get<double>(), 1.931851653, 1e-9);
  EXPECT_NEAR(j["pf"]["beta0"].get<double>(), 2.0 * std::cos(M_PI / 12.0), 1e-10);
  EXPECT_EQ(j["schema"], io::kReportSchema);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("check-biunitary", {fixture("fourier3.json")}).exit_code, cli::kPass);
  EXPECT_EQ(run("irreducible", {fixture("fourier3.json")}).exit_code, cli::kPass);
  EXPECT_EQ(run("check-biunitary", {fixture("bad_cell.json")}).exit_code, cli::kInputError);
  EXPECT_EQ(run("no-such-command", {}).exit_code, cli::kInputError);
  EXPECT_EQ(run("example", {}, {{"id", "nonsense"}}).exit_code, cli::kInputError);
  EXPECT_EQ(run("action-check", {fixture("fourier3.json")}, {{"field", fixture("nonflat_fourier3.json")}}).exit_code,
            cli::kFail);
  EXPECT_EQ(run("theorem-verify", {fixture("fourier3.json")}, {{"field", fixture("nonflat_fourier3.json")}}).exit_code,
            cli::kFail);
  EXPECT_EQ(run("theorem-verify", {fixture("fourier3.json")}, {{"field", fixture("random_fourier3.json")}}).exit_code,
            cli::kFail);
}

TEST(Cli, IdentityConnectionIsNotBiunitary) {
  const auto e = run("example", {}, {{"id", "identity:3"}});
  ASSERT_EQ(e.exit_code, cli::kPass);
  cli::CommandRequest req;
  req.command = "check-biunitary";
  req.inputs = {"-"};
  req.stdin_text = e.report;
  EXPECT_EQ(cli::run(req).exit_code, cli::kFail);
}

TEST(Cli, FlatFieldsDimension) {
  const auto r = run("flat-fields", {fixture("fourier3.json")});
  ASSERT_EQ(r.exit_code, cli::kPass);
  EXPECT_EQ(io::parse(r.report)["dimension"], 1);
}

TEST(Cli, TheoremVerifySamplesAgree) {
  const auto r = run("theorem-verify", {fixture("fourier3.json")}, {{"samples", "10"}});
  EXPECT_EQ(r.exit_code, cli::kPass) << r.summary;
  EXPECT_TRUE(io::parse(r.report)["all_agree"].get<bool>());
}

TEST(Cli, ReportsAreDeterministic) {
  const std::map<std::string, std::string> opts{{"samples", "5"}};
  const auto a = run("theorem-verify", {fixture("fourier3.json")}, opts);
  const auto b = run("theorem-verify", {fixture("fourier3.json")}, opts);
  EXPECT_EQ(a.report, b.report);
}

TEST(Binary, PipelineAndExitCodes) {
  const std::string bin = BICONNECT_CLI_PATH;
  const auto pf = shell("example --id example2 | " + bin + " pf");
  EXPECT_EQ(pf.code, 0);
  EXPECT_NEAR(io::parse(pf.out)["pf"]["beta0"].get<double>(), 1.931851653, 1e-9);
  EXPECT_EQ(shell("check-biunitary " + fixture("fourier3.json")).code, 0);
  EXPECT_EQ(shell("check-biunitary " + fixture("bad_cell.json")).code, 3);
  EXPECT_EQ(shell("action-check --field " + fixture("nonflat_fourier3.json") + " " + fixture("fourier3.json")).code, 1);
  EXPECT_EQ(shell("--bogus-flag pf").code, 3);
}

TEST(Binary, OutFileMatchesStdout) {
  const auto path = std::filesystem::temp_directory_path() / "biconnect_out_test.json";
  const auto a = shell("--seed 3 --out " + path.string() + " theorem-verify --samples 3 " + fixture("fourier3.json"));
  const auto b = shell("--seed 3 theorem-verify --samples 3 " + fixture("fourier3.json"));
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(io::read_text(path), b.out);
  std::filesystem::remove(path);
}
