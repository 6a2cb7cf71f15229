#pragma once

#include <functional>
#include <span>

namespace walkdiff::quadrature {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// Adaptive Gauss-Kronrod 7-15 over [a, b] to absolute tolerance abs_tol.
/// Interior points listed in `kinks` (density kinks, support edges) seed the
/// initial subdivision so non-smooth integrands do not stall the refinement.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, std::span<const double> kinks = {});

}  // namespace walkdiff::quadrature
