#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace walkdiff::process {

/// Partition 0 = t_0 < t_1 < ... < t_T = 1 of the unit time interval.
struct TimeGrid {
  std::vector<double> times;

  std::size_t step_count() const { return times.empty() ? 0 : times.size() - 1; }
  double delta(std::size_t k) const { return times[k + 1] - times[k]; }
  std::vector<double> deltas() const;
};

/// Uniform grid with T steps of size exactly 1/T.
TimeGrid build_grid(std::size_t step_count);

/// Grid from an explicit strictly increasing list spanning [0, 1].
TimeGrid build_grid(std::vector<double> times);

/// Drift/diffusion schedule families. The drift is linear, f(x,t) = beta(t) x.
///
///   constant     beta(t) = beta0, g(t) = g0
///   ddpm_linear  beta(t) = -b(t)/2, g(t) = sqrt(b(t)), b(t) = bmin + (bmax-bmin) t
///   vdm          gamma(t) = gamma0 + (gamma1-gamma0) t, beta(t) = -gamma'(t) sigmoid(gamma(t))/2,
///                g(t)^2 = gamma'(t) sigmoid(gamma(t))
enum class ScheduleKind { constant, ddpm_linear, vdm };

ScheduleKind schedule_kind_from_name(std::string_view name);
std::string_view schedule_kind_name(ScheduleKind kind);

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double a = 0.0;  // beta0 | bmin | gamma0
  double b = 0.0;  // g0    | bmax | gamma1

  double beta(double t) const;
  double g(double t) const;
  double drift_lipschitz() const;
  double diffusion_lipschitz() const;

  /// Exact mean coefficient of the continuous process, exp(int_0^t beta).
  double alpha_bar(double t) const;
  /// Exact variance of the continuous process started at a point mass.
  double gamma_bar(double t) const;
};

ScheduleSpec constant_schedule(double beta0, double g0);
ScheduleSpec ddpm_linear_schedule(double beta_min, double beta_max);
ScheduleSpec vdm_schedule(double gamma0, double gamma1);

/// Drift half of a schedule: evaluates beta(t) with a recorded Lipschitz bound.
struct DriftSpec {
  ScheduleSpec schedule;
  double beta(double t) const { return schedule.beta(t); }
  double lipschitz() const { return schedule.drift_lipschitz(); }
};

/// Diffusion half: evaluates g(t) >= 0 with a recorded Lipschitz bound.
struct DiffusionSpec {
  ScheduleSpec schedule;
  double g(double t) const { return schedule.g(t); }
  double lipschitz() const { return schedule.diffusion_lipschitz(); }
};

/// Discretized forward process: a matched drift/diffusion pair on a grid.
struct ProcessSpec {
  ScheduleSpec schedule;
  TimeGrid grid;

  DriftSpec drift() const { return DriftSpec{schedule}; }
  DiffusionSpec diffusion() const { return DiffusionSpec{schedule}; }
  double alpha_bar(double t) const { return schedule.alpha_bar(t); }
  double gamma_bar(double t) const { return schedule.gamma_bar(t); }
};

ProcessSpec make_process(const ScheduleSpec& schedule, TimeGrid grid);

/// Per-step mean coefficient and variance of the forward walk:
/// alpha_bar[k] = E[x_k]/x_0 and gamma_bar[k] = Var(x_k) for a point-mass start.
struct MomentTable {
  std::vector<double> alpha_bar;  // alpha_bar[0] = 1
  std::vector<double> gamma_bar;  // gamma_bar[0] = 0

  std::size_t step_count() const { return alpha_bar.size() - 1; }
  double sigma(std::size_t k) const;
};

/// Stable forward recursion:
///   alpha_bar[k+1] = (1 + beta(t_k) dt_k) alpha_bar[k]
///   gamma_bar[k+1] = (1 + beta(t_k) dt_k)^2 gamma_bar[k] + g(t_k)^2 dt_k
MomentTable moments(const ProcessSpec& spec);

/// Explicit product/sum form of the same moments; cross-check only.
/// Requires every (1 + beta dt) factor nonzero.
MomentTable moments_explicit(const ProcessSpec& spec);

/// Moments of the DDPM chain x_{k+1} = sqrt(1-b_k) x_k + sqrt(b_k) eps,
/// each b_k in (0,1): alpha_bar[k] = prod sqrt(1-b_i), gamma_bar[k] by the
/// matching variance recursion (identically 1 - alpha_bar^2).
MomentTable ddpm_moments(std::span<const double> beta_seq);

/// max_k |gamma_bar[k] + alpha_bar[k]^2 - 1| for a DDPM table.
double ddpm_identity_gap(const MomentTable& table);

/// Moments of the VDM chain with alpha(t)^2 = sigmoid(-gamma(t)),
/// sigma(t)^2 = sigmoid(gamma(t)), via the telescoping per-step recursion.
/// alpha_bar[0]/gamma_bar[0] use the clean-data convention (1, 0).
/// Non-monotone gamma warns on stderr but is not rejected.
MomentTable vdm_moments(const std::function<double(double)>& gamma_fn, const TimeGrid& grid);

// JSON schedule block: {"kind", "params", "T", "spacing"}.
nlohmann::json process_to_json(const ProcessSpec& spec);
ProcessSpec process_from_json(const nlohmann::json& j);

}  // namespace walkdiff::process
