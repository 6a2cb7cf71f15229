#include "walkdiff/increments.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "walkdiff/errors.hpp"

namespace walkdiff::increments {

IncrementKind kind_from_name(std::string_view name) {
  if (name == "gaussian") return IncrementKind::gaussian;
  if (name == "laplace") return IncrementKind::laplace;
  if (name == "uniform") return IncrementKind::uniform;
  throw ConfigError("unknown increment kind: " + std::string(name));
}

std::string_view kind_name(IncrementKind kind) {
  switch (kind) {
    case IncrementKind::gaussian: return "gaussian";
    case IncrementKind::laplace: return "laplace";
    case IncrementKind::uniform: return "uniform";
  }
  return "?";
}

double sample_z(IncrementKind kind, RngStream& rng) {
  switch (kind) {
    case IncrementKind::gaussian:
      return rng.normal();
    case IncrementKind::laplace: {
      // Inverse CDF on u in (-1/2, 1/2).
      double u;
      do {
        u = rng.uniform01();
      } while (u == 0.0);
      u -= 0.5;
      const double s = u < 0.0 ? -1.0 : 1.0;
      return -kLaplaceScale * s * std::log(1.0 - 2.0 * std::abs(u));
    }
    case IncrementKind::uniform:
      return (2.0 * rng.uniform01() - 1.0) * kUniformHalfWidth;
  }
  return 0.0;
}

std::vector<double> sample_z(IncrementKind kind, std::size_t dim, RngStream& rng) {
  std::vector<double> z(dim);
  for (auto& zi : z) zi = sample_z(kind, rng);
  return z;
}

double density_z(IncrementKind kind, double z) {
  switch (kind) {
    case IncrementKind::gaussian:
      return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    case IncrementKind::laplace:
      return std::exp(-std::abs(z) / kLaplaceScale) / (2.0 * kLaplaceScale);
    case IncrementKind::uniform:
      return std::abs(z) <= kUniformHalfWidth ? 1.0 / (2.0 * kUniformHalfWidth) : 0.0;
  }
  return 0.0;
}

double fourth_moment(IncrementKind kind) {
  switch (kind) {
    case IncrementKind::gaussian: return 3.0;
    case IncrementKind::laplace: return 6.0;
    case IncrementKind::uniform: return 9.0 / 5.0;
  }
  return 0.0;
}

std::vector<double> step_delta(const StepContext& ctx, IncrementKind kind, RngStream& rng) {
  const double noise_scale = ctx.g * std::sqrt(ctx.dt);
  std::vector<double> delta(ctx.x.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta[i] = ctx.beta * ctx.x[i] * ctx.dt + noise_scale * sample_z(kind, rng);
  }
  return delta;
}

}  // namespace walkdiff::increments
