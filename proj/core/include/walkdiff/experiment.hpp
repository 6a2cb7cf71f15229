#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "walkdiff/analysis.hpp"
#include "walkdiff/increments.hpp"
#include "walkdiff/process.hpp"
#include "walkdiff/score.hpp"

namespace walkdiff::experiment {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared with the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitStatistical = 4;

/// Validated experiment configuration; `raw` keeps the JSON snapshot that
/// produced it for the run manifest.
struct ExperimentConfig {
  std::uint64_t seed = 20250601;
  std::size_t threads = 1;

  process::ProcessSpec process;
  increments::IncrementKind q_kind = increments::IncrementKind::gaussian;
  increments::IncrementKind p_kind = increments::IncrementKind::gaussian;
  score::GaussianMixture data;
  score::TrainConfig train;

  std::size_t simulate_paths = 100000;
  std::vector<double> simulate_x0 = {1.0};
  std::size_t paths_csv_limit = 100;

  std::vector<increments::IncrementKind> sweep_kinds;
  std::vector<std::size_t> sweep_t_list = {8, 32, 128, 512};
  std::size_t sweep_replicates = 10;
  std::size_t sweep_paths = 100000;
  analysis::SweepMetric sweep_metric = analysis::SweepMetric::ks;

  std::size_t sample_paths = 50000;
  std::string sample_score = "analytic";  // "analytic" or "checkpoint:<path>"

  std::size_t elbo_points = 100;
  std::size_t elbo_replicates = 4;
  double elbo_recon_sigma = 0.0;

  std::size_t likelihood_points = 100;

  std::vector<double> kl_sigmas = {0.5, 1.0, 2.0};
  std::vector<double> kl_mu_deltas = {0.0, 0.5, 1.0, 2.0};

  nlohmann::json raw;
};

nlohmann::json default_config_json();
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Applies one "dotted.path=value" override in place; the value is parsed
/// as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// FNV-1a 64 hash of the canonical dump, as 16 hex digits.
std::string config_hash_hex(const nlohmann::json& config);

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "moments", "kl-table", "simulate", "verify-invariance",
      "train",   "sample",   "elbo",     "likelihood",
  };
  return names;
}

/// Runs one subcommand, writing its artifacts and a manifest under out_dir.
/// Returns kExitOk or kExitStatistical; configuration and numeric problems
/// surface as ConfigError / NumericError.
int run(const std::string& subcommand, const ExperimentConfig& cfg,
        const std::filesystem::path& out_dir);

}  // namespace walkdiff::experiment
