#include "walkdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

#include "walkdiff/csv.hpp"
#include "walkdiff/errors.hpp"
#include "walkdiff/walk.hpp"

namespace walkdiff::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double point_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> maybe_subsample(std::span<const double> x, std::size_t dim, std::size_t cap,
                                    RngStream& rng) {
  const std::size_t n = x.size() / dim;
  if (n <= cap) return {x.begin(), x.end()};
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform01() * double(n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  std::vector<double> out(cap * dim);
  for (std::size_t i = 0; i < cap; ++i) {
    std::copy_n(x.begin() + idx[i] * dim, dim, out.begin() + i * dim);
  }
  return out;
}

/// Pairwise distances of the pooled sample, packed upper triangle in float.
/// Row-major: pair (i, j), i < j, sits at i*(2N-i-1)/2 + (j-i-1).
struct DistanceTable {
  std::size_t count = 0;
  std::vector<float> packed;
  double total = 0.0;  // sum over all pairs

  const float* row(std::size_t i) const {
    return packed.data() + i * (2 * count - i - 1) / 2 - (i + 1);
  }
};

DistanceTable build_table(const std::vector<double>& pooled, std::size_t dim) {
  DistanceTable table;
  table.count = pooled.size() / dim;
  table.packed.resize(table.count * (table.count - 1) / 2);
  std::size_t at = 0;
  for (std::size_t i = 0; i < table.count; ++i) {
    const double* pi = pooled.data() + i * dim;
    for (std::size_t j = i + 1; j < table.count; ++j, ++at) {
      const double d = point_distance(pi, pooled.data() + j * dim, dim);
      table.packed[at] = static_cast<float>(d);
      table.total += d;
    }
  }
  return table;
}

/// Sum of pairwise distances within a sorted index set.
double within_sum(const DistanceTable& table, std::span<const std::size_t> sorted_idx) {
  double sum = 0.0;
  for (std::size_t a = 0; a < sorted_idx.size(); ++a) {
    const std::size_t i = sorted_idx[a];
    const float* r = table.row(i);
    for (std::size_t b = a + 1; b < sorted_idx.size(); ++b) {
      sum += r[sorted_idx[b]];
    }
  }
  return sum;
}

double energy_from_sums(double between, double within_a, double within_b, std::size_t n,
                        std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 2.0 * between / (nn * mm) - 2.0 * within_a / (nn * (nn - 1.0)) -
         2.0 * within_b / (mm * (mm - 1.0));
}

}  // namespace

nlohmann::json two_sample_to_json(const TwoSampleResult& r) {
  nlohmann::json j = {
      {"statistic", r.statistic},
      {"n", r.n},
      {"m", r.m},
      {"critical_1pct", r.critical_1pct},
      {"critical_5pct", r.critical_5pct},
      {"reject_1pct", r.reject_1pct},
      {"reject_5pct", r.reject_5pct},
  };
  if (r.p_value >= 0.0) j["p_value"] = r.p_value;
  return j;
}

TwoSampleResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 10 || b.size() < 10) {
    throw ConfigError("ks_two_sample: need at least 10 samples per side");
  }
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double n = static_cast<double>(sa.size());
  const double m = static_cast<double>(sb.size());
  double stat = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    stat = std::max(stat, std::abs(double(i) / n - double(j) / m));
  }

  TwoSampleResult r;
  r.statistic = stat;
  r.n = sa.size();
  r.m = sb.size();
  const double scale = std::sqrt((n + m) / (n * m));
  r.critical_1pct = ks_coefficient(0.01) * scale;
  r.critical_5pct = ks_coefficient(0.05) * scale;
  r.reject_1pct = stat > r.critical_1pct;
  r.reject_5pct = stat > r.critical_5pct;
  return r;
}

TwoSampleResult energy_distance(std::span<const double> a, std::span<const double> b,
                                std::size_t dim, RngStream& rng, const EnergyOptions& options) {
  if (dim == 0) throw ConfigError("energy_distance: dim must be >= 1");
  if (a.size() % dim != 0 || b.size() % dim != 0) {
    throw ConfigError("energy_distance: sample size not a multiple of dim");
  }
  if (a.size() / dim < 10 || b.size() / dim < 10) {
    throw ConfigError("energy_distance: need at least 10 points per side");
  }

  RngStream sub_a = rng.child(0xa);
  RngStream sub_b = rng.child(0xb);
  std::vector<double> pooled = maybe_subsample(a, dim, options.subsample_cap, sub_a);
  const std::vector<double> xb = maybe_subsample(b, dim, options.subsample_cap, sub_b);
  const std::size_t n = pooled.size() / dim;
  const std::size_t m = xb.size() / dim;
  const std::size_t total = n + m;
  pooled.insert(pooled.end(), xb.begin(), xb.end());

  const DistanceTable table = build_table(pooled, dim);

  std::vector<std::size_t> side_a(n);
  std::iota(side_a.begin(), side_a.end(), std::size_t{0});
  std::vector<std::size_t> side_b(m);
  std::iota(side_b.begin(), side_b.end(), n);
  const double wa_obs = within_sum(table, side_a);
  const double wb_obs = within_sum(table, side_b);

  TwoSampleResult r;
  r.n = n;
  r.m = m;
  r.statistic = energy_from_sums(table.total - wa_obs - wb_obs, wa_obs, wb_obs, n, m);

  const auto permutation_hits = [&](std::size_t first, std::size_t count) {
    std::size_t hits = 0;
    std::vector<std::size_t> idx(total), sel_a(n), sel_b(m);
    for (std::size_t p = first; p < first + count; ++p) {
      RngStream perm_rng = rng.child(0x100 + p);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(perm_rng.uniform01() * double(total - i));
        std::swap(idx[i], idx[std::min(j, total - 1)]);
      }
      std::copy_n(idx.begin(), n, sel_a.begin());
      std::copy(idx.begin() + n, idx.end(), sel_b.begin());
      std::sort(sel_a.begin(), sel_a.end());
      std::sort(sel_b.begin(), sel_b.end());
      const double wa = within_sum(table, sel_a);
      const double wb = within_sum(table, sel_b);
      if (energy_from_sums(table.total - wa - wb, wa, wb, n, m) >= r.statistic) ++hits;
    }
    return hits;
  };

  std::size_t at_least = 0;
  if (options.threads <= 1 || options.permutations < 2 * options.threads) {
    at_least = permutation_hits(0, options.permutations);
  } else {
    const std::size_t workers = options.threads;
    std::vector<std::size_t> hits(workers, 0);
    std::vector<std::thread> pool;
    const std::size_t chunk = (options.permutations + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t first = w * chunk;
      const std::size_t count = std::min(chunk, options.permutations - std::min(options.permutations, first));
      if (count == 0) break;
      pool.emplace_back([&, w, first, count] { hits[w] = permutation_hits(first, count); });
    }
    for (auto& t : pool) t.join();
    for (std::size_t h : hits) at_least += h;
  }

  r.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + options.permutations);
  r.reject_1pct = r.p_value <= 0.01;
  r.reject_5pct = r.p_value <= 0.05;
  return r;
}

MomentCheck moment_check(std::span<const double> slice, std::size_t dim,
                         std::span<const double> expected_mean, double expected_var,
                         double z_limit) {
  if (dim == 0 || expected_mean.size() != dim) {
    throw ConfigError("moment_check: bad dimensions");
  }
  const std::size_t n = slice.size() / dim;
  if (n < 100) throw ConfigError("moment_check: need at least 100 samples");
  const double nn = static_cast<double>(n);

  MomentCheck result;
  result.z_mean.resize(dim);
  result.z_var.resize(dim);
  result.pass = true;

  for (std::size_t c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += slice[i * dim + c];
    mean /= nn;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = slice[i * dim + c] - mean;
      const double d2 = d * d;
      m2 += d2;
      m4 += d2 * d2;
    }
    m2 /= nn;
    m4 /= nn;

    if (expected_var == 0.0) {
      // Deterministic slice: compare values exactly, variance z is undefined.
      result.z_var[c] = kNaN;
      double max_dev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        max_dev = std::max(max_dev, std::abs(slice[i * dim + c] - expected_mean[c]));
      }
      result.z_mean[c] = max_dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      if (max_dev != 0.0) result.pass = false;
      continue;
    }

    const double se_mean = std::sqrt(m2 / nn);
    const double se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / nn);
    result.z_mean[c] = (mean - expected_mean[c]) / se_mean;
    result.z_var[c] = (m2 - expected_var) / se_var;
    if (std::abs(result.z_mean[c]) >= z_limit || std::abs(result.z_var[c]) >= z_limit) {
      result.pass = false;
    }
  }
  return result;
}

SweepMetric sweep_metric_from_name(std::string_view name) {
  if (name == "ks") return SweepMetric::ks;
  if (name == "energy") return SweepMetric::energy;
  throw ConfigError("unknown sweep metric: " + std::string(name));
}

std::vector<double> SweepTable::medians(std::span<const std::size_t> t_list) const {
  std::vector<double> out;
  out.reserve(t_list.size());
  for (std::size_t t : t_list) {
    std::vector<double> values;
    for (const auto& row : rows) {
      if (row.steps == t) values.push_back(row.distance);
    }
    out.push_back(values.empty() ? kNaN : median_of(std::move(values)));
  }
  return out;
}

SweepTable convergence_sweep(IncrementKind kind, std::span<const std::size_t> t_list,
                             const process::ScheduleSpec& schedule, SweepMetric metric,
                             std::size_t replicates, std::size_t paths_per_side,
                             std::span<const double> x0, RngStream& rng) {
  for (std::size_t i = 0; i + 1 < t_list.size(); ++i) {
    if (!(t_list[i] < t_list[i + 1])) {
      throw ConfigError("convergence_sweep: T list must be strictly increasing");
    }
  }
  const std::size_t dim = x0.size();
  const auto sampler = walk::fixed_x0({x0.begin(), x0.end()});

  SweepTable table;
  table.kind = kind;
  table.metric = metric;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    const auto spec = process::make_process(schedule, process::build_grid(t_list[ti]));
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      RngStream rep_rng = rng.child(ti * 1000 + rep);
      RngStream kind_rng = rep_rng.child(1);
      RngStream ref_rng = rep_rng.child(2);
      const auto sample = walk::terminal_slice(spec, kind, sampler, paths_per_side, kind_rng);
      const auto reference =
          walk::terminal_slice(spec, IncrementKind::gaussian, sampler, paths_per_side, ref_rng);

      double distance = 0.0;
      if (metric == SweepMetric::ks) {
        // Per-coordinate KS; the worst coordinate carries the statistic.
        std::vector<double> col_a(paths_per_side), col_b(paths_per_side);
        for (std::size_t c = 0; c < dim; ++c) {
          for (std::size_t i = 0; i < paths_per_side; ++i) {
            col_a[i] = sample[i * dim + c];
            col_b[i] = reference[i * dim + c];
          }
          distance = std::max(distance, ks_two_sample(col_a, col_b).statistic);
        }
      } else {
        RngStream perm_rng = rep_rng.child(3);
        distance = energy_distance(sample, reference, dim, perm_rng).statistic;
      }
      table.rows.push_back(SweepRow{t_list[ti], distance, rep, rep_rng.key()});
    }
  }
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  csv::Writer w(out);
  w.begin_row();
  w.field("T");
  w.field("distance");
  w.field("replicate");
  w.field("seed");
  w.end_row();
  for (const auto& row : table.rows) {
    w.begin_row();
    w.field(row.steps);
    w.field(row.distance);
    w.field(row.replicate);
    w.field(row.seed);
    w.end_row();
  }
}

double sweep_loglog_slope(std::span<const std::size_t> t_list, std::span<const double> medians) {
  if (t_list.size() != medians.size() || t_list.size() < 2) {
    throw ConfigError("sweep_loglog_slope: need matching lists of length >= 2");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(t_list.size());
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const double x = std::log(static_cast<double>(t_list[i]));
    const double y = std::log(medians[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace walkdiff::analysis
