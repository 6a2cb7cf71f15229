#include "walkdiff/walk.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "walkdiff/csv.hpp"
#include "walkdiff/errors.hpp"

namespace walkdiff::walk {

namespace {

void check_finite(std::span<const double> x, std::size_t step) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw NumericError("walk: non-finite state at step " + std::to_string(step));
    }
  }
}

}  // namespace

WalkPath simulate_forward(const ProcessSpec& spec, IncrementKind kind,
                          std::span<const double> x0, RngStream& rng) {
  const std::size_t steps = spec.grid.step_count();
  const std::size_t dim = x0.size();
  if (dim == 0) throw ConfigError("simulate_forward: empty initial state");

  WalkPath path;
  path.grid = spec.grid;
  path.kind = kind;
  path.seed = rng.key();
  path.dim = dim;
  path.states.resize((steps + 1) * dim);
  std::copy(x0.begin(), x0.end(), path.states.begin());

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = spec.grid.times[k];
    const double dt = spec.grid.delta(k);
    const double beta = spec.schedule.beta(t);
    const double noise_scale = spec.schedule.g(t) * std::sqrt(dt);
    const double* cur = path.states.data() + k * dim;
    double* next = path.states.data() + (k + 1) * dim;
    for (std::size_t i = 0; i < dim; ++i) {
      next[i] = cur[i] + beta * cur[i] * dt + noise_scale * increments::sample_z(kind, rng);
    }
    check_finite({next, dim}, k);
  }
  return path;
}

std::vector<double> interpolate(const WalkPath& path, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("interpolate: t must lie in [0, 1]");
  const auto& times = path.grid.times;
  if (t >= times.back()) return {path.state(path.grid.step_count()).begin(),
                                 path.state(path.grid.step_count()).end()};
  // Last interval with t_k <= t.
  std::size_t k = 0;
  while (k + 2 < times.size() && times[k + 1] <= t) ++k;
  const double theta = (t - times[k]) / path.grid.delta(k);
  const auto a = path.state(k);
  const auto b = path.state(k + 1);
  std::vector<double> out(path.dim);
  for (std::size_t i = 0; i < path.dim; ++i) out[i] = (1.0 - theta) * a[i] + theta * b[i];
  return out;
}

WalkPath refine_nested(const ProcessSpec& spec, IncrementKind kind, std::size_t refine_factor,
                       std::span<const double> x0, RngStream& rng) {
  if (refine_factor == 0) throw ConfigError("refine_nested: refinement factor must be >= 1");
  const std::size_t coarse_steps = spec.grid.step_count();
  const std::size_t dim = x0.size();
  if (dim == 0) throw ConfigError("refine_nested: empty initial state");

  WalkPath path;
  path.kind = kind;
  path.seed = rng.key();
  path.dim = dim;
  path.grid.times.resize(coarse_steps * refine_factor + 1);
  path.states.resize((coarse_steps * refine_factor + 1) * dim);
  std::copy(x0.begin(), x0.end(), path.states.begin());
  path.grid.times[0] = spec.grid.times[0];

  for (std::size_t k = 0; k < coarse_steps; ++k) {
    const double t = spec.grid.times[k];
    const double dt = spec.grid.delta(k);
    const double beta = spec.schedule.beta(t);
    const double fine_dt = dt / static_cast<double>(refine_factor);
    const double fine_noise = spec.schedule.g(t) * std::sqrt(fine_dt);
    // Drift is frozen at the coarse iterate; noise accumulates at fine scale.
    const double* coarse = path.states.data() + k * refine_factor * dim;
    for (std::size_t s = 0; s < refine_factor; ++s) {
      const std::size_t idx = k * refine_factor + s;
      const double* cur = path.states.data() + idx * dim;
      double* next = path.states.data() + (idx + 1) * dim;
      for (std::size_t i = 0; i < dim; ++i) {
        next[i] = cur[i] + beta * coarse[i] * fine_dt + fine_noise * increments::sample_z(kind, rng);
      }
      path.grid.times[idx + 1] =
          s + 1 == refine_factor ? spec.grid.times[k + 1]
                                 : t + fine_dt * static_cast<double>(s + 1);
      check_finite({next, dim}, idx);
    }
  }
  return path;
}

StateSampler fixed_x0(std::vector<double> x0) {
  return [x0 = std::move(x0)](RngStream&) { return x0; };
}

std::span<const double> PathEnsemble::state(std::size_t path, std::size_t k) const {
  const std::size_t stride = (spec.grid.step_count() + 1) * dim;
  return {states.data() + path * stride + k * dim, dim};
}

std::vector<double> PathEnsemble::slice(std::size_t k) const {
  std::vector<double> out(path_count * dim);
  for (std::size_t p = 0; p < path_count; ++p) {
    const auto row = state(p, k);
    std::copy(row.begin(), row.end(), out.begin() + p * dim);
  }
  return out;
}

PathEnsemble ensemble(const ProcessSpec& spec, IncrementKind kind, const StateSampler& x0_sampler,
                      std::size_t path_count, RngStream& rng, std::size_t value_cap) {
  if (path_count == 0) throw ConfigError("ensemble: need at least one path");
  RngStream probe = rng.child(0);
  const std::size_t dim = x0_sampler(probe).size();
  const std::size_t values = path_count * (spec.grid.step_count() + 1) * dim;
  if (values > value_cap) {
    throw ConfigError("ensemble: N*(T+1)*dim = " + std::to_string(values) +
                      " exceeds the storage cap of " + std::to_string(value_cap) +
                      " values; reduce N or T, or raise the cap");
  }

  PathEnsemble ens;
  ens.spec = spec;
  ens.kind = kind;
  ens.seed = rng.key();
  ens.dim = dim;
  ens.path_count = path_count;
  ens.states.resize(values);
  const std::size_t stride = (spec.grid.step_count() + 1) * dim;
  for (std::size_t p = 0; p < path_count; ++p) {
    RngStream stream = rng.child(p);
    const auto x0 = x0_sampler(stream);
    WalkPath path = simulate_forward(spec, kind, x0, stream);
    std::copy(path.states.begin(), path.states.end(), ens.states.begin() + p * stride);
  }
  return ens;
}

std::vector<double> terminal_slice(const ProcessSpec& spec, IncrementKind kind,
                                   const StateSampler& x0_sampler, std::size_t path_count,
                                   RngStream& rng) {
  const std::size_t steps = spec.grid.step_count();
  std::vector<double> out;
  std::vector<double> x;
  for (std::size_t p = 0; p < path_count; ++p) {
    RngStream stream = rng.child(p);
    x = x0_sampler(stream);
    if (p == 0) out.reserve(path_count * x.size());
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = spec.grid.times[k];
      const double dt = spec.grid.delta(k);
      const double beta = spec.schedule.beta(t);
      const double noise_scale = spec.schedule.g(t) * std::sqrt(dt);
      for (auto& xi : x) {
        xi += beta * xi * dt + noise_scale * increments::sample_z(kind, stream);
      }
    }
    check_finite(x, steps);
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

void write_paths_csv(const PathEnsemble& ens, std::ostream& out) {
  csv::Writer w(out);
  std::vector<std::string> header{"path_id", "k", "t"};
  for (std::size_t i = 0; i < ens.dim; ++i) header.push_back("x_" + std::to_string(i));
  w.row(header);
  const std::size_t steps = ens.spec.grid.step_count();
  for (std::size_t p = 0; p < ens.path_count; ++p) {
    for (std::size_t k = 0; k <= steps; ++k) {
      w.begin_row();
      w.field(p);
      w.field(k);
      w.field(ens.spec.grid.times[k]);
      for (double v : ens.state(p, k)) w.field(v);
      w.end_row();
    }
  }
}

nlohmann::json ensemble_metadata(const PathEnsemble& ens) {
  return nlohmann::json{
      {"seed", ens.seed},
      {"spec", process::process_to_json(ens.spec)},
      {"kind", increments::kind_name(ens.kind)},
      {"N", ens.path_count},
      {"dim", ens.dim},
  };
}

}  // namespace walkdiff::walk
