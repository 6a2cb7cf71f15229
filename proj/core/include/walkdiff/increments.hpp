#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "walkdiff/rng.hpp"

namespace walkdiff::increments {

/// Standardized step-noise family: mean 0, variance 1 per coordinate.
enum class IncrementKind { gaussian, laplace, uniform };

// Unit-variance parameters: Laplace scale b with 2b^2 = 1, uniform
// half-width w with w^2/3 = 1.
inline constexpr double kLaplaceScale = 0.70710678118654752440;
inline constexpr double kUniformHalfWidth = 1.73205080756887729353;

IncrementKind kind_from_name(std::string_view name);
std::string_view kind_name(IncrementKind kind);

/// One draw from the standardized family.
double sample_z(IncrementKind kind, RngStream& rng);

/// d i.i.d. coordinates.
std::vector<double> sample_z(IncrementKind kind, std::size_t dim, RngStream& rng);

/// Density of the standardized family at z (0 outside the uniform support).
double density_z(IncrementKind kind, double z);

/// E[z^4]: 3 (gaussian), 6 (laplace), 9/5 (uniform).
double fourth_moment(IncrementKind kind);

/// Inputs of one forward step: state, step index, step size, and the
/// drift/diffusion coefficients frozen at the step's left endpoint.
struct StepContext {
  std::span<const double> x;
  std::size_t k = 0;
  double dt = 0.0;
  double beta = 0.0;
  double g = 0.0;
};

/// One structured step: beta*x*dt + g*sqrt(dt)*z, with z i.i.d. from `kind`.
std::vector<double> step_delta(const StepContext& ctx, IncrementKind kind, RngStream& rng);

}  // namespace walkdiff::increments
