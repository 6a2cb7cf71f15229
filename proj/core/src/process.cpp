#include "walkdiff/process.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "walkdiff/errors.hpp"

namespace walkdiff::process {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> TimeGrid::deltas() const {
  std::vector<double> d(step_count());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = delta(k);
  return d;
}

TimeGrid build_grid(std::size_t step_count) {
  if (step_count == 0) throw ConfigError("build_grid: step count must be >= 1");
  TimeGrid grid;
  grid.times.resize(step_count + 1);
  for (std::size_t k = 0; k <= step_count; ++k) {
    grid.times[k] = static_cast<double>(k) / static_cast<double>(step_count);
  }
  grid.times.back() = 1.0;
  return grid;
}

TimeGrid build_grid(std::vector<double> times) {
  if (times.size() < 2) throw ConfigError("build_grid: need at least two time points");
  if (times.front() != 0.0 || times.back() != 1.0) {
    throw ConfigError("build_grid: custom times must span [0, 1]");
  }
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    if (!(times[k] < times[k + 1])) {
      throw ConfigError("build_grid: times must be strictly increasing");
    }
  }
  return TimeGrid{std::move(times)};
}

ScheduleKind schedule_kind_from_name(std::string_view name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "ddpm-linear") return ScheduleKind::ddpm_linear;
  if (name == "vdm") return ScheduleKind::vdm;
  throw ConfigError("unknown schedule kind: " + std::string(name));
}

std::string_view schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::ddpm_linear: return "ddpm-linear";
    case ScheduleKind::vdm: return "vdm";
  }
  return "?";
}

double ScheduleSpec::beta(double t) const {
  switch (kind) {
    case ScheduleKind::constant:
      return a;
    case ScheduleKind::ddpm_linear:
      return -0.5 * (a + (b - a) * t);
    case ScheduleKind::vdm: {
      const double rate = b - a;
      return -0.5 * rate * sigmoid(a + rate * t);
    }
  }
  return 0.0;
}

double ScheduleSpec::g(double t) const {
  switch (kind) {
    case ScheduleKind::constant:
      return b;
    case ScheduleKind::ddpm_linear:
      return std::sqrt(a + (b - a) * t);
    case ScheduleKind::vdm: {
      const double rate = b - a;
      return std::sqrt(rate * sigmoid(a + rate * t));
    }
  }
  return 0.0;
}

double ScheduleSpec::drift_lipschitz() const {
  switch (kind) {
    case ScheduleKind::constant:
      return 0.0;
    case ScheduleKind::ddpm_linear:
      return 0.5 * std::abs(b - a);
    case ScheduleKind::vdm:
      // |d beta/dt| = rate^2 sig(1-sig)/2 <= rate^2/8
      return (b - a) * (b - a) / 8.0;
  }
  return 0.0;
}

double ScheduleSpec::diffusion_lipschitz() const {
  switch (kind) {
    case ScheduleKind::constant:
      return 0.0;
    case ScheduleKind::ddpm_linear: {
      // g' = b'/(2 sqrt(b)), largest at the small end of b(t).
      const double lo = std::min(a, b);
      if (lo <= 0.0) throw ConfigError("ddpm-linear: beta range must be positive");
      return std::abs(b - a) / (2.0 * std::sqrt(lo));
    }
    case ScheduleKind::vdm: {
      const double rate = b - a;
      const double glo = g(0.0), ghi = g(1.0);
      // g' = rate g sig(-gamma)/2, g bounded by the endpoint values.
      return 0.5 * rate * std::max(glo, ghi);
    }
  }
  return 0.0;
}

double ScheduleSpec::alpha_bar(double t) const {
  switch (kind) {
    case ScheduleKind::constant:
      return std::exp(a * t);
    case ScheduleKind::ddpm_linear: {
      const double integral = a * t + 0.5 * (b - a) * t * t;
      return std::exp(-0.5 * integral);
    }
    case ScheduleKind::vdm: {
      // exp(int beta) = alpha(t)/alpha(0) with alpha(t)^2 = sigmoid(-gamma(t)).
      const double g_t = a + (b - a) * t;
      return std::sqrt(sigmoid(-g_t) / sigmoid(-a));
    }
  }
  return 1.0;
}

double ScheduleSpec::gamma_bar(double t) const {
  switch (kind) {
    case ScheduleKind::constant: {
      if (a == 0.0) return b * b * t;
      return b * b * (std::exp(2.0 * a * t) - 1.0) / (2.0 * a);
    }
    case ScheduleKind::ddpm_linear: {
      const double ab = alpha_bar(t);
      return 1.0 - ab * ab;
    }
    case ScheduleKind::vdm: {
      const double g_t = a + (b - a) * t;
      const double ab = alpha_bar(t);
      return sigmoid(g_t) - sigmoid(a) * ab * ab;
    }
  }
  return 0.0;
}

ScheduleSpec constant_schedule(double beta0, double g0) {
  if (!std::isfinite(beta0) || !std::isfinite(g0) || g0 < 0.0) {
    throw ConfigError("constant schedule: beta must be finite, g >= 0");
  }
  return ScheduleSpec{ScheduleKind::constant, beta0, g0};
}

ScheduleSpec ddpm_linear_schedule(double beta_min, double beta_max) {
  if (beta_min <= 0.0 || beta_max <= 0.0) {
    throw ConfigError("ddpm-linear schedule: beta range must be positive");
  }
  return ScheduleSpec{ScheduleKind::ddpm_linear, beta_min, beta_max};
}

ScheduleSpec vdm_schedule(double gamma0, double gamma1) {
  if (!(gamma1 > gamma0)) {
    throw ConfigError("vdm schedule: gamma1 must exceed gamma0");
  }
  return ScheduleSpec{ScheduleKind::vdm, gamma0, gamma1};
}

ProcessSpec make_process(const ScheduleSpec& schedule, TimeGrid grid) {
  if (grid.times.size() < 2) throw ConfigError("make_process: empty grid");
  return ProcessSpec{schedule, std::move(grid)};
}

double MomentTable::sigma(std::size_t k) const { return std::sqrt(gamma_bar[k]); }

MomentTable moments(const ProcessSpec& spec) {
  const std::size_t steps = spec.grid.step_count();
  MomentTable table;
  table.alpha_bar.assign(steps + 1, 1.0);
  table.gamma_bar.assign(steps + 1, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = spec.grid.times[k];
    const double dt = spec.grid.delta(k);
    const double factor = 1.0 + spec.schedule.beta(t) * dt;
    const double g = spec.schedule.g(t);
    table.alpha_bar[k + 1] = factor * table.alpha_bar[k];
    table.gamma_bar[k + 1] = factor * factor * table.gamma_bar[k] + g * g * dt;
  }
  return table;
}

MomentTable moments_explicit(const ProcessSpec& spec) {
  const std::size_t steps = spec.grid.step_count();
  std::vector<double> factor(steps), gsq(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = spec.grid.times[k];
    const double dt = spec.grid.delta(k);
    factor[k] = 1.0 + spec.schedule.beta(t) * dt;
    const double g = spec.schedule.g(t);
    gsq[k] = g * g * dt;
    if (factor[k] == 0.0) {
      throw NumericError("moments_explicit: (1 + beta dt) vanishes at step " + std::to_string(k));
    }
  }
  MomentTable table;
  table.alpha_bar.assign(steps + 1, 1.0);
  table.gamma_bar.assign(steps + 1, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    double prod = 1.0;
    for (std::size_t i = 0; i < k; ++i) prod *= factor[i];
    table.alpha_bar[k] = prod;
    // Step i contributes g_i^2 amplified by every later step's factor.
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double amp = 1.0;
      for (std::size_t j = i + 1; j < k; ++j) amp *= factor[j];
      sum += amp * amp * gsq[i];
    }
    table.gamma_bar[k] = sum;
  }
  return table;
}

MomentTable ddpm_moments(std::span<const double> beta_seq) {
  for (double b : beta_seq) {
    if (!(b >= 0.0 && b < 1.0)) {
      throw ConfigError("ddpm_moments: each beta must lie in [0, 1)");
    }
  }
  MomentTable table;
  table.alpha_bar.assign(beta_seq.size() + 1, 1.0);
  table.gamma_bar.assign(beta_seq.size() + 1, 0.0);
  for (std::size_t k = 0; k < beta_seq.size(); ++k) {
    const double keep = 1.0 - beta_seq[k];
    table.alpha_bar[k + 1] = std::sqrt(keep) * table.alpha_bar[k];
    table.gamma_bar[k + 1] = keep * table.gamma_bar[k] + beta_seq[k];
  }
  return table;
}

double ddpm_identity_gap(const MomentTable& table) {
  double gap = 0.0;
  for (std::size_t k = 0; k < table.alpha_bar.size(); ++k) {
    const double a = table.alpha_bar[k];
    gap = std::max(gap, std::abs(table.gamma_bar[k] + a * a - 1.0));
  }
  return gap;
}

MomentTable vdm_moments(const std::function<double(double)>& gamma_fn, const TimeGrid& grid) {
  const std::size_t steps = grid.step_count();
  std::vector<double> alpha(steps + 1), var(steps + 1);
  bool monotone = true;
  double prev_gamma = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double gm = gamma_fn(grid.times[k]);
    if (k > 0 && gm < prev_gamma) monotone = false;
    prev_gamma = gm;
    alpha[k] = std::sqrt(sigmoid(-gm));
    var[k] = sigmoid(gm);
  }
  if (!monotone) {
    std::cerr << "vdm_moments: warning: gamma is not monotone on the grid\n";
  }
  // Clean-data boundary: the chain starts at (1, 0) regardless of gamma(0).
  alpha[0] = 1.0;
  var[0] = 0.0;
  MomentTable table;
  table.alpha_bar.assign(steps + 1, 1.0);
  table.gamma_bar.assign(steps + 1, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double ratio = alpha[k + 1] / alpha[k];
    const double step_var = var[k + 1] - ratio * ratio * var[k];
    table.alpha_bar[k + 1] = ratio * table.alpha_bar[k];
    table.gamma_bar[k + 1] = ratio * ratio * table.gamma_bar[k] + step_var;
  }
  return table;
}

nlohmann::json process_to_json(const ProcessSpec& spec) {
  nlohmann::json params;
  switch (spec.schedule.kind) {
    case ScheduleKind::constant:
      params = {{"beta", spec.schedule.a}, {"g", spec.schedule.b}};
      break;
    case ScheduleKind::ddpm_linear:
      params = {{"beta_min", spec.schedule.a}, {"beta_max", spec.schedule.b}};
      break;
    case ScheduleKind::vdm:
      params = {{"gamma0", spec.schedule.a}, {"gamma1", spec.schedule.b}};
      break;
  }
  nlohmann::json j = {
      {"kind", schedule_kind_name(spec.schedule.kind)},
      {"params", params},
      {"T", spec.grid.step_count()},
  };
  const TimeGrid uniform = build_grid(spec.grid.step_count());
  if (spec.grid.times == uniform.times) {
    j["spacing"] = "uniform";
  } else {
    j["spacing"] = spec.grid.times;
  }
  return j;
}

ProcessSpec process_from_json(const nlohmann::json& j) {
  try {
    const auto kind = schedule_kind_from_name(j.at("kind").get<std::string>());
    const auto& params = j.at("params");
    ScheduleSpec schedule;
    switch (kind) {
      case ScheduleKind::constant:
        schedule = constant_schedule(params.at("beta").get<double>(), params.at("g").get<double>());
        break;
      case ScheduleKind::ddpm_linear:
        schedule =
            ddpm_linear_schedule(params.at("beta_min").get<double>(), params.at("beta_max").get<double>());
        break;
      case ScheduleKind::vdm:
        schedule = vdm_schedule(params.at("gamma0").get<double>(), params.at("gamma1").get<double>());
        break;
    }
    const auto steps = j.at("T").get<std::size_t>();
    TimeGrid grid;
    if (!j.contains("spacing") || j.at("spacing") == "uniform") {
      grid = build_grid(steps);
    } else {
      auto times = j.at("spacing").get<std::vector<double>>();
      if (times.size() != steps + 1) {
        throw ConfigError("process_from_json: spacing length must be T + 1");
      }
      grid = build_grid(std::move(times));
    }
    return make_process(schedule, std::move(grid));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("process_from_json: ") + e.what());
  }
}

}  // namespace walkdiff::process
