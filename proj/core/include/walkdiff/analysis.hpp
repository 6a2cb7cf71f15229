#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "walkdiff/increments.hpp"
#include "walkdiff/process.hpp"
#include "walkdiff/rng.hpp"

namespace walkdiff::analysis {

using increments::IncrementKind;

struct TwoSampleResult {
  double statistic = 0.0;
  std::size_t n = 0, m = 0;
  double critical_1pct = 0.0;
  double critical_5pct = 0.0;
  bool reject_1pct = false;
  bool reject_5pct = false;
  double p_value = -1.0;  // permutation p-value where available, else -1
};

nlohmann::json two_sample_to_json(const TwoSampleResult& r);

/// Two-sided two-sample Kolmogorov-Smirnov test with asymptotic critical
/// values c(alpha) sqrt((n+m)/(nm)), c(0.01) = 1.628, c(0.05) = 1.358.
TwoSampleResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct EnergyOptions {
  std::size_t permutations = 200;
  /// Larger sets are subsampled (without replacement) to this many points
  /// per side before testing; keeps the all-pairs cost bounded.
  std::size_t subsample_cap = 5000;
  /// Worker threads for the permutation loop; results are independent of
  /// the thread count (one child stream per permutation index).
  std::size_t threads = 1;
};

/// Energy distance 2 E|a-b| - E|a-a'| - E|b-b'| between row-major n x dim
/// samples, with a label-permutation p-value.
TwoSampleResult energy_distance(std::span<const double> a, std::span<const double> b,
                                std::size_t dim, RngStream& rng,
                                const EnergyOptions& options = {});

struct MomentCheck {
  std::vector<double> z_mean;  // per coordinate
  std::vector<double> z_var;   // per coordinate; NaN when expected_var == 0
  bool pass = false;
};

/// Compares slice sample mean/variance against expected values at 4 standard
/// errors; the variance standard error uses the fourth-moment plug-in.
/// A zero expected variance switches to an exact comparison of the values.
MomentCheck moment_check(std::span<const double> slice, std::size_t dim,
                         std::span<const double> expected_mean, double expected_var,
                         double z_limit = 4.0);

enum class SweepMetric { ks, energy };
SweepMetric sweep_metric_from_name(std::string_view name);

struct SweepRow {
  std::size_t steps = 0;  // T
  double distance = 0.0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
};

struct SweepTable {
  IncrementKind kind = IncrementKind::gaussian;
  SweepMetric metric = SweepMetric::ks;
  std::vector<SweepRow> rows;

  std::vector<double> medians(std::span<const std::size_t> t_list) const;
};

/// For each T: distance between the terminal slice of a `kind` ensemble and
/// a fresh gaussian-kind reference on the same schedule (one replicate =
/// one pair of independent ensembles, seeded from the master stream).
SweepTable convergence_sweep(IncrementKind kind, std::span<const std::size_t> t_list,
                             const process::ScheduleSpec& schedule, SweepMetric metric,
                             std::size_t replicates, std::size_t paths_per_side,
                             std::span<const double> x0, RngStream& rng);

void write_sweep_csv(const SweepTable& table, std::ostream& out);

/// Least-squares slope of log(median distance) against log(T).
double sweep_loglog_slope(std::span<const std::size_t> t_list, std::span<const double> medians);

}  // namespace walkdiff::analysis
