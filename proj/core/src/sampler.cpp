#include "walkdiff/sampler.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "walkdiff/errors.hpp"

namespace walkdiff::sampler {

namespace {

void check_finite(std::span<const double> x, const char* who, std::size_t step) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(who) + ": non-finite state at step " + std::to_string(step));
    }
  }
}

/// Probability-flow velocity beta(t) x - g(t)^2 s(x, t) / 2.
std::vector<double> pf_velocity(const ProcessSpec& spec, const score::ScoreModel& model,
                                std::span<const double> x, double t) {
  const double beta = spec.schedule.beta(t);
  const double g = spec.schedule.g(t);
  auto v = model.score(x, t);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = beta * x[i] - 0.5 * g * g * v[i];
  }
  return v;
}

/// One classical RK4 step of the probability flow from (x, t0) to t0 + h.
std::vector<double> rk4_step(const ProcessSpec& spec, const score::ScoreModel& model,
                             std::span<const double> x, double t0, double h) {
  const std::size_t d = x.size();
  const auto k1 = pf_velocity(spec, model, x, t0);
  std::vector<double> tmp(d);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  const auto k2 = pf_velocity(spec, model, tmp, t0 + 0.5 * h);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  const auto k3 = pf_velocity(spec, model, tmp, t0 + 0.5 * h);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + h * k3[i];
  const auto k4 = pf_velocity(spec, model, tmp, t0 + h);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

double trace_jacobian_fd(const ProcessSpec& spec, const score::ScoreModel& model,
                         std::span<const double> x, double t) {
  std::vector<double> xp(x.begin(), x.end());
  double trace = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-4 * (1.0 + std::abs(x[i]));
    const double xi = x[i];
    xp[i] = xi + h;
    const auto vp = pf_velocity(spec, model, xp, t);
    xp[i] = xi - h;
    const auto vm = pf_velocity(spec, model, xp, t);
    xp[i] = xi;
    trace += (vp[i] - vm[i]) / (2.0 * h);
  }
  return trace;
}

}  // namespace

std::vector<double> reverse_step(std::span<const double> x_next, std::size_t k,
                                 const ReverseSpec& rspec, RngStream& rng) {
  const auto& grid = rspec.process.grid;
  if (k >= grid.step_count()) throw ConfigError("reverse_step: k out of range");
  const double t = grid.times[k + 1];
  const double dt = grid.delta(k);
  const double beta = rspec.process.schedule.beta(t);
  const double g = rspec.process.schedule.g(t);
  const auto s = rspec.model->score(x_next, t);
  const double noise = g * std::sqrt(dt);
  std::vector<double> x(x_next.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = x_next[i] - (beta * x_next[i] - g * g * s[i]) * dt +
           noise * increments::sample_z(rspec.p_kind, rng);
  }
  check_finite(x, "reverse_step", k);
  return x;
}

std::vector<double> sample(const ReverseSpec& rspec, std::size_t n, RngStream& rng) {
  if (rspec.model == nullptr) throw ConfigError("sample: missing score model");
  const std::size_t steps = rspec.process.grid.step_count();
  const std::size_t dim = rspec.model->dim();
  std::vector<double> out(n * dim);
  for (std::size_t chain = 0; chain < n; ++chain) {
    RngStream stream = rng.child(chain);
    std::vector<double> x(dim);
    for (auto& xi : x) xi = stream.normal();  // standard-normal prior
    for (std::size_t k = steps; k-- > 0;) {
      x = reverse_step(x, k, rspec, stream);
    }
    std::copy(x.begin(), x.end(), out.begin() + chain * dim);
  }
  return out;
}

std::vector<double> pf_ode_sample(const ProcessSpec& spec, const score::ScoreModel& model,
                                  std::span<const double> x_terminal) {
  std::vector<double> x(x_terminal.begin(), x_terminal.end());
  const auto& times = spec.grid.times;
  for (std::size_t k = times.size() - 1; k-- > 0;) {
    x = rk4_step(spec, model, x, times[k + 1], times[k] - times[k + 1]);
    check_finite(x, "pf_ode_sample", k);
  }
  return x;
}

std::vector<double> pf_ode_forward(const ProcessSpec& spec, const score::ScoreModel& model,
                                   std::span<const double> x0) {
  std::vector<double> x(x0.begin(), x0.end());
  const auto& times = spec.grid.times;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    x = rk4_step(spec, model, x, times[k], times[k + 1] - times[k]);
    check_finite(x, "pf_ode_forward", k);
  }
  return x;
}

LikelihoodResult log_likelihood(std::span<const double> x0, const ProcessSpec& spec,
                                const score::ScoreModel& model) {
  const std::size_t dim = x0.size();
  if (dim == 0 || dim > 4) {
    throw ConfigError("log_likelihood: exact Jacobian trace supports 1 <= dim <= 4");
  }
  std::vector<double> x(x0.begin(), x0.end());
  const auto& times = spec.grid.times;
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    // RK4 on the augmented system (x, log-density correction).
    const auto k1 = trace_jacobian_fd(spec, model, x, times[k]);
    std::vector<double> mid = rk4_step(spec, model, x, times[k], 0.5 * h);
    const auto k2 = trace_jacobian_fd(spec, model, mid, times[k] + 0.5 * h);
    const auto next = rk4_step(spec, model, x, times[k], h);
    const auto k4 = trace_jacobian_fd(spec, model, next, times[k + 1]);
    integral += h / 6.0 * (k1 + 4.0 * k2 + k4);
    x = next;
    check_finite(x, "log_likelihood", k);
  }
  double log_prior = 0.0;
  for (double xi : x) {
    log_prior += -0.5 * xi * xi - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  LikelihoodResult result;
  result.log_density = log_prior + integral;
  result.trace_steps = times.size() - 1;
  if (!std::isfinite(result.log_density)) throw NumericError("log_likelihood: non-finite result");
  return result;
}

LikelihoodSummary log_likelihood_batch(std::span<const double> x0_batch, std::size_t dim,
                                       const ProcessSpec& spec, const score::ScoreModel& model) {
  if (dim == 0 || x0_batch.size() % dim != 0) throw ConfigError("log_likelihood_batch: bad shape");
  const std::size_t n = x0_batch.size() / dim;
  LikelihoodSummary summary;
  summary.per_point.reserve(n);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lp =
        log_likelihood({x0_batch.data() + i * dim, dim}, spec, model).log_density;
    summary.per_point.push_back(lp);
    sum += lp;
    sum_sq += lp * lp;
  }
  summary.mean = sum / static_cast<double>(n);
  const double var = std::max(sum_sq / static_cast<double>(n) - summary.mean * summary.mean, 0.0);
  summary.stderr_mean = std::sqrt(var / static_cast<double>(n));
  return summary;
}

}  // namespace walkdiff::sampler
