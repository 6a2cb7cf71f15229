#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "walkdiff/errors.hpp"
#include "walkdiff/experiment.hpp"

namespace {

int dispatch(const std::string& subcommand, const std::string& config_path,
             const std::vector<std::string>& overrides, const std::string& out_dir,
             bool seed_set, std::uint64_t seed, bool threads_set, std::size_t threads) {
  namespace exp = walkdiff::experiment;

  nlohmann::json config = exp::default_config_json();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw walkdiff::ConfigError("cannot open config file: " + config_path);
    config = nlohmann::json::parse(in, nullptr, false);
    if (config.is_discarded()) {
      throw walkdiff::ConfigError("config file is not valid JSON: " + config_path);
    }
  }
  for (const auto& assignment : overrides) {
    exp::apply_override(config, assignment);
  }
  if (seed_set) config["seed"] = seed;
  if (threads_set) config["threads"] = threads;

  const auto cfg = exp::config_from_json(config);
  const int code = exp::run(subcommand, cfg, out_dir);
  std::cout << subcommand << ": " << (code == exp::kExitOk ? "ok" : "statistical check failed")
            << " (artifacts in " << out_dir << ")\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"walkdiff: structured random walks, closed-form step losses, and reverse-time sampling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "runs/out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  app.add_option("--config", config_path, "JSON config file (built-in defaults if omitted)");
  app.add_option("--out", out_dir, "output directory for artifacts and the run manifest");
  app.add_option("--set", overrides, "config override, dotted.path=value (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads for permutation loops");

  for (const auto& name : walkdiff::experiment::subcommands()) {
    app.add_subcommand(name)->silent();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : walkdiff::experiment::kExitConfig;
  }

  try {
    const std::string subcommand = app.get_subcommands().front()->get_name();
    return dispatch(subcommand, config_path, overrides, out_dir, seed_opt->count() > 0, seed,
                    threads_opt->count() > 0, threads);
  } catch (const walkdiff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return walkdiff::experiment::kExitConfig;
  } catch (const walkdiff::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return walkdiff::experiment::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return walkdiff::experiment::kExitNumeric;
  }
}
