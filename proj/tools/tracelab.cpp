#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tracelab/cli.hpp"

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tracelab::Error(tracelab::Errc::config_error, "--config: cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tracelab;

  CLI::App app{"Moore-Penrose identity checks, P1 trace-operator experiments and inequality constants."};
  app.footer(
      "Config files hold `key = value` lines with keys: command, seed, dims, trials, domain, refine,\n"
      "s_values, output_path, mode. Flags override file values.\n"
      "Exit status: 0 all checks passed, 1 a check failed, 2 configuration error.");

  std::string command, config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string seed, dims, trials, domain, refine, orders, mode, out;

  app.add_option("command", command, "verify-identities | fem-check | constants | report");
  app.add_option("--config", config_path, "Config file with key = value lines");
  app.add_option("--seed", seed, "Random seed (default 1)");
  app.add_option("--dims", dims, "Operator shapes AxB[,CxD...] for verify-identities (default 8x6)");
  app.add_option("--trials", trials, "Random pairs for verify-identities (default 10)");
  app.add_option("--domain", domain, "square | lshape | ngon:<sides> (default square)");
  app.add_option("--refine", refine, "Quadrisection levels (default 1)");
  app.add_option("--s", orders,
                 "Orders v1,v2,... (default -1,0.25,0.5,0.75,1,2 for identities; 0,0.1,...,1 for constants)");
  app.add_option("--mode", mode, "graph | surrogate | both (default both)");
  app.add_option("--out", out, "Output directory (default $TRACELAB_OUT_DIR, else .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfigError;
  }

  const std::pair<const char*, const std::string*> flags[] = {
      {"command", &command}, {"seed", &seed},   {"dims", &dims},     {"trials", &trials},      {"domain", &domain},
      {"refine", &refine},   {"s_values", &orders}, {"mode", &mode}, {"output_path", &out}};
  for (const auto& [key, value] : flags)
    if (!value->empty()) overrides.emplace_back(key, *value);

  cli::RunConfig config;
  try {
    config = cli::parse_config(config_path.empty() ? std::string() : read_text(config_path), overrides);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return cli::kExitConfigError;
  }

  const cli::RunOutcome outcome = cli::run(config);
  (outcome.exit_code == cli::kExitConfigError ? std::cerr : std::cout) << outcome.summary;
  for (const auto& file : outcome.files) std::cout << "wrote " << file.string() << '\n';
  return outcome.exit_code;
}
