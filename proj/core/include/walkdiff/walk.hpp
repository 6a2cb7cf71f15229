#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "walkdiff/increments.hpp"
#include "walkdiff/process.hpp"
#include "walkdiff/rng.hpp"

namespace walkdiff::walk {

using increments::IncrementKind;
using process::ProcessSpec;
using process::TimeGrid;

/// One forward trajectory: (T+1) states of dimension dim, row-major.
struct WalkPath {
  TimeGrid grid;
  IncrementKind kind = IncrementKind::gaussian;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::vector<double> states;  // (T+1) * dim

  std::span<const double> state(std::size_t k) const {
    return {states.data() + k * dim, dim};
  }
};

/// x_{k+1} = x_k + beta(t_k) x_k dt_k + g(t_k) sqrt(dt_k) z_k.
/// Throws NumericError with the step index if the state leaves the finite range.
WalkPath simulate_forward(const ProcessSpec& spec, IncrementKind kind,
                          std::span<const double> x0, RngStream& rng);

/// Piecewise-linear interpolation of a path; exact at grid points.
std::vector<double> interpolate(const WalkPath& path, double t);

/// Nested refinement: the coarse walk with each step's noise replaced by the
/// sum of S fine draws scaled by sqrt(dt/S), drift frozen at the coarse left
/// endpoint. Returns the path on the S*T-point grid; the coarse sub-path
/// (every S-th state) follows the same law as simulate_forward, exactly so
/// for S = 1.
WalkPath refine_nested(const ProcessSpec& spec, IncrementKind kind, std::size_t refine_factor,
                       std::span<const double> x0, RngStream& rng);

using StateSampler = std::function<std::vector<double>(RngStream&)>;

/// Point-mass initial condition.
StateSampler fixed_x0(std::vector<double> x0);

/// N independent paths over one spec; path i uses the child stream for
/// index i, so results do not depend on simulation order.
struct PathEnsemble {
  ProcessSpec spec;
  IncrementKind kind = IncrementKind::gaussian;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::size_t path_count = 0;
  std::vector<double> states;  // path-major: N * (T+1) * dim

  std::span<const double> state(std::size_t path, std::size_t k) const;
  /// All paths at time index k, as an N x dim row-major matrix.
  std::vector<double> slice(std::size_t k) const;
};

/// Default cap on stored ensemble values (N * (T+1) * dim doubles).
inline constexpr std::size_t kEnsembleValueCap = 200'000'000;

PathEnsemble ensemble(const ProcessSpec& spec, IncrementKind kind, const StateSampler& x0_sampler,
                      std::size_t path_count, RngStream& rng,
                      std::size_t value_cap = kEnsembleValueCap);

/// Terminal-slice-only simulation for large sweeps; returns an N x dim matrix.
std::vector<double> terminal_slice(const ProcessSpec& spec, IncrementKind kind,
                                   const StateSampler& x0_sampler, std::size_t path_count,
                                   RngStream& rng);

/// CSV rows path_id,k,t,x_0..x_{dim-1} (RFC 4180 line endings).
void write_paths_csv(const PathEnsemble& ens, std::ostream& out);

/// Sidecar metadata: seed, spec, kind, N.
nlohmann::json ensemble_metadata(const PathEnsemble& ens);

}  // namespace walkdiff::walk
