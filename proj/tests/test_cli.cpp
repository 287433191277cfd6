#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tracelab/cli.hpp"

using namespace tracelab;
using namespace tracelab::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("tracelab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::getline(in, line);  // header
  while (std::getline(in, line)) rows.push_back(cli::detail::parse_csv_line(line));
  return rows;
}

RunConfig config_for(const std::string& command, const fs::path& out,
                     std::vector<std::pair<std::string, std::string>> extra = {}) {
  extra.emplace_back("output_path", out.string());
  return parse_config("command = " + command + "\n", extra);
}

void expect_config_error(const std::string& text, const std::string& mentions,
                         const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  try {
    parse_config(text, overrides);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_error) << e.what();
    EXPECT_NE(std::string(e.what()).find(mentions), std::string::npos) << e.what();
  }
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(TRACELAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// ---------------------------------------------------------------- config

TEST(ParseConfig, EmptyInputWithCommandGivesDefaults) {
  const RunConfig c = parse_config("", {{"command", "constants"}});
  RunConfig expected;
  expected.command = "constants";
  EXPECT_EQ(c, expected);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.trials, 10);
  EXPECT_EQ(c.domain, "square");
  EXPECT_EQ(c.refine, 1);
  EXPECT_EQ(c.mode, "both");
  ASSERT_EQ(c.dims.size(), 1u);
  EXPECT_EQ(c.dims[0].dom, 8);
  EXPECT_EQ(c.dims[0].cod, 6);
}

TEST(ParseConfig, OrderOutsideConstantsRange) {
  expect_config_error("command = constants\ns_values = 2\n", "s_values");
  expect_config_error("command = constants\n", "s_values", {{"s_values", "0.5,2"}});
  // the identity suites accept any real order
  EXPECT_NO_THROW(parse_config("command = verify-identities\ns_values = 2,-1\n"));
}

TEST(ParseConfig, RoundTrip) {
  const RunConfig c = parse_config(
      "# sweep\ncommand = verify-identities\nseed = 42\ndims = 8x6,3x5\ntrials = 4\n"
      "domain = ngon:9\nrefine = 2\ns_values = -1,0.1,0.25\noutput_path = /tmp/x y\nmode = graph\n");
  const RunConfig again = parse_config(emit_config(c));
  EXPECT_EQ(again, c);
  EXPECT_EQ(emit_config(again), emit_config(c));
  EXPECT_EQ(c.s_values[1], 0.1);
  EXPECT_EQ(c.output_path, "/tmp/x y");
}

TEST(ParseConfig, FlagsOverrideFile) {
  const RunConfig c = parse_config("command = fem-check\nrefine = 2\n", {{"refine", "0"}, {"domain", "lshape"}});
  EXPECT_EQ(c.refine, 0);
  EXPECT_EQ(c.domain, "lshape");
}

TEST(ParseConfig, ErrorsNameTheLineOrFlag) {
  expect_config_error("command = report\nbogus = 1\n", "line 2");
  expect_config_error("command = report\nseed = 1\nseed = 2\n", "line 3");
  expect_config_error("command = report\njust text\n", "line 2");
  expect_config_error("command = report\ntrials = 0\n", "trials");
  expect_config_error("command = report\ntrials = 3x\n", "line 2");
  expect_config_error("command = report\n", "refine", {{"refine", "-1"}});
  expect_config_error("command = report\n", "--dims", {{"dims", "8by6"}});
  expect_config_error("command = report\nmode = both,graph\n", "mode");
  expect_config_error("command = launch\n", "launch");
  expect_config_error("", "command");
  expect_config_error("command = report\ndomain = circle\n", "circle");
  expect_config_error("command = verify-identities\ns_values = nan\n", "s_values");
}

// ---------------------------------------------------------------- CSV dialect

TEST(Csv, FieldQuotingRoundTrips) {
  for (const std::string field : {"plain", "with,comma", "with \"quote\"", ""}) {
    const std::string line = cli::detail::csv_field(field) + "," + cli::detail::csv_field("x");
    const auto parsed = cli::detail::parse_csv_line(line);
    ASSERT_EQ(parsed.size(), 2u);
    EXPECT_EQ(parsed[0], field);
  }
}

// ---------------------------------------------------------------- commands

TEST(VerifyIdentities, TwentyTrialsGiveNineRowsEach) {
  const fs::path dir = fresh_dir("verify");
  const RunOutcome out = run(config_for("verify-identities", dir, {{"trials", "20"}}));
  EXPECT_EQ(out.exit_code, kExitOk) << out.summary;
  const std::string text = slurp(dir / "identities.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), kIdentitiesHeader);
  const auto rows = csv_rows(dir / "identities.csv");
  ASSERT_EQ(rows.size(), 20u * 9u);
  for (const auto& r : rows) {
    ASSERT_EQ(r.size(), 5u);
    EXPECT_NE(r[4], "false") << r[0] << " " << r[1];
  }
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(VerifyIdentities, ByteIdenticalAcrossRuns) {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  run(config_for("verify-identities", a, {{"seed", "7"}, {"dims", "8x6,5x9"}, {"trials", "6"}}));
  run(config_for("verify-identities", b, {{"seed", "7"}, {"dims", "8x6,5x9"}, {"trials", "6"}}));
  EXPECT_EQ(slurp(a / "identities.csv"), slurp(b / "identities.csv"));
  // summaries differ only in the timestamp header
  const auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
  EXPECT_EQ(body(slurp(a / "summary.txt")), body(slurp(b / "summary.txt")));
}

TEST(VerifyIdentities, MatchesGoldenTable) {
  // Structural columns must match exactly. Residuals are roundoff and are
  // compared in a band, since the last digits depend on compiler and SIMD.
  const fs::path dir = fresh_dir("golden");
  run(config_for("verify-identities", dir, {{"seed", "1"}, {"dims", "8x6"}, {"trials", "5"}}));
  const auto got = csv_rows(dir / "identities.csv");
  const auto want = csv_rows(fs::path(TRACELAB_GOLDEN_DIR) / "verify_identities_seed1.csv");
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i][0], want[i][0]) << i;
    EXPECT_EQ(got[i][1], want[i][1]) << i;
    EXPECT_EQ(got[i][3], want[i][3]) << i;
    EXPECT_EQ(got[i][4], want[i][4]) << i;
    EXPECT_NEAR(std::stod(got[i][2]), std::stod(want[i][2]), 1e-12) << i;
  }
}

TEST(FemCheck, SquareSummaryReportsUnitTraceNorm) {
  const fs::path dir = fresh_dir("fem");
  const RunOutcome out = run(config_for("fem-check", dir, {{"refine", "0"}}));
  EXPECT_EQ(out.exit_code, kExitOk) << out.summary;
  const std::string summary = slurp(dir / "summary.txt");
  const auto at = summary.find("op_norm(Gamma)=");
  ASSERT_NE(at, std::string::npos);
  EXPECT_NEAR(std::stod(summary.substr(at + 15)), 1.0, 1e-10);
  EXPECT_TRUE(fs::exists(dir / "mesh.txt"));
  const auto rows = csv_rows(dir / "identities.csv");
  // 4 spectrum rows, 3 harmonic/penrose rows, 6 resolvent, tb_pinv,
  // decomposition, tb_adjoint, one permutation row per default order
  EXPECT_EQ(rows.size(), 4u + 2u + 1u + 6u + 3u + default_identity_orders().size());
}

TEST(FemCheck, LShapeRefineOnePasses) {
  const fs::path dir = fresh_dir("fem_l");
  const RunOutcome out = run(config_for("fem-check", dir, {{"domain", "lshape"}}));
  EXPECT_EQ(out.exit_code, kExitOk) << out.summary;
}

TEST(FemCheck, BadDomainIsConfigError) {
  const fs::path dir = fresh_dir("fem_bad");
  RunConfig c = config_for("fem-check", dir);
  c.domain = "ngon:2";
  const RunOutcome out = run(c);
  EXPECT_EQ(out.exit_code, kExitConfigError);
  EXPECT_NE(out.summary.find("ConfigError"), std::string::npos) << out.summary;
}

TEST(Constants, RowLayoutPerTheoremAndMode) {
  const fs::path dir = fresh_dir("constants");
  const RunOutcome out = run(config_for("constants", dir, {{"s_values", "0,0.5,1"}}));
  EXPECT_EQ(out.exit_code, kExitOk) << out.summary;
  const auto rows = csv_rows(dir / "constants.csv");
  std::map<std::string, int> count;
  for (const auto& r : rows) {
    ASSERT_EQ(r.size(), 9u);
    ++count[r[0] + "/" + r[8]];
  }
  EXPECT_EQ(count["trace/graph"], 3);
  EXPECT_EQ(count["trace/surrogate"], 3);
  EXPECT_EQ(count["interpolation/graph"], 3);
  EXPECT_EQ(count["interpolation/surrogate"], 3);
  EXPECT_EQ(count["harmonic/graph"], static_cast<int>(lab::default_harmonic_grid().size()));
  EXPECT_EQ(count["bergman/graph"], 1);
  EXPECT_EQ(rows.size(), 12u + 2u * lab::default_harmonic_grid().size() + 1u);
}

TEST(Constants, SingleModeAndDeterminism) {
  const fs::path a = fresh_dir("const_a");
  const fs::path b = fresh_dir("const_b");
  const auto extra = std::vector<std::pair<std::string, std::string>>{
      {"domain", "lshape"}, {"s_values", "0.25,0.75"}, {"mode", "surrogate"}};
  EXPECT_EQ(run(config_for("constants", a, extra)).exit_code, kExitOk);
  EXPECT_EQ(run(config_for("constants", b, extra)).exit_code, kExitOk);
  EXPECT_EQ(slurp(a / "constants.csv"), slurp(b / "constants.csv"));
  for (const auto& r : csv_rows(a / "constants.csv"))
    if (r[0] != "bergman") EXPECT_EQ(r[8], "surrogate");
}

TEST(Report, AggregatesWithoutRecomputing) {
  const fs::path dir = fresh_dir("report");
  run(config_for("verify-identities", dir, {{"trials", "3"}}));
  run(config_for("constants", dir, {{"refine", "0"}, {"s_values", "0,1"}}));
  const std::string before = slurp(dir / "identities.csv") + slurp(dir / "constants.csv");
  const RunOutcome out = run(config_for("report", dir));
  EXPECT_EQ(out.exit_code, kExitOk) << out.summary;
  EXPECT_NE(out.summary.find("identities rows=27 failed=0"), std::string::npos) << out.summary;
  EXPECT_NE(out.summary.find("constants rows="), std::string::npos);
  EXPECT_NE(out.summary.find("trace/graph rows=2"), std::string::npos) << out.summary;
  EXPECT_EQ(slurp(dir / "identities.csv") + slurp(dir / "constants.csv"), before);
}

TEST(Report, FlagsFailedRowsAndMalformedTables) {
  const fs::path dir = fresh_dir("report_bad");
  {
    std::ofstream os(dir / "identities.csv");
    os << kIdentitiesHeader << "\nresolvent_1,ctx,1e-3,1.0000000000000001e-09,false\n";
  }
  EXPECT_EQ(run(config_for("report", dir)).exit_code, kExitCheckFailed);
  {
    std::ofstream os(dir / "identities.csv");
    os << kIdentitiesHeader << "\nresolvent_1,ctx,abc,1e-9,true\n";
  }
  EXPECT_EQ(run(config_for("report", dir)).exit_code, kExitConfigError);
  {
    std::ofstream os(dir / "identities.csv");
    os << "name,residual\n";
  }
  EXPECT_EQ(run(config_for("report", dir)).exit_code, kExitConfigError);
}

TEST(Report, EmptyDirectoryIsAnInputError) {
  const RunOutcome out = run(config_for("report", fresh_dir("report_empty")));
  EXPECT_EQ(out.exit_code, kExitConfigError);
  EXPECT_NE(out.summary.find("IoError"), std::string::npos) << out.summary;
}

TEST(OutputDir, EnvironmentDefault) {
  const fs::path dir = fresh_dir("env");
  ::setenv("TRACELAB_OUT_DIR", dir.c_str(), 1);
  RunConfig c = parse_config("command = verify-identities\ntrials = 1\n");
  const RunOutcome out = run(c);
  ::unsetenv("TRACELAB_OUT_DIR");
  EXPECT_EQ(out.output_dir, dir);
  EXPECT_TRUE(fs::exists(dir / "identities.csv"));
  c.output_path = "explicit";
  EXPECT_EQ(resolve_output_dir(c), fs::path("explicit"));
}

// ---------------------------------------------------------------- binary

TEST(Binary, ExitCodes) {
  const fs::path dir = fresh_dir("binary");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_binary("verify-identities --trials 2" + out), 0);
  EXPECT_EQ(run_binary("fem-check --refine 0" + out), 0);
  EXPECT_EQ(run_binary("constants --s 2" + out), 2);
  EXPECT_EQ(run_binary("launch" + out), 2);
  EXPECT_EQ(run_binary("verify-identities --trials nope" + out), 2);
  EXPECT_EQ(run_binary("report --unknown-flag 3" + out), 2);
  EXPECT_EQ(run_binary("report" + out), 0);
  EXPECT_EQ(run_binary("--help"), 0);
}

TEST(Binary, ConfigFileWithFlagOverride) {
  const fs::path dir = fresh_dir("binary_cfg");
  {
    std::ofstream os(dir / "run.cfg");
    os << "command = verify-identities\ntrials = 2\ndims = 4x4\n";
  }
  EXPECT_EQ(run_binary("--config " + (dir / "run.cfg").string() + " --trials 3 --out " + dir.string()), 0);
  EXPECT_EQ(csv_rows(dir / "identities.csv").size(), 27u);
  EXPECT_EQ(run_binary("--config " + (dir / "missing.cfg").string()), 2);
}
