#pragma once

#include <span>
#include <string_view>

namespace walkdiff::divergence {

/// One-dimensional location/scale distribution for KL computations.
/// Uniform is parameterized by half-width: support [mu - w, mu + w].
enum class Family { gaussian, laplace, uniform };

struct ScalarDist {
  Family family = Family::gaussian;
  double mu = 0.0;
  double scale = 1.0;  // sigma | b | half-width w

  double pdf(double x) const;
  double log_pdf(double x) const;
  double support_lo() const;
  double support_hi() const;
};

ScalarDist gaussian_dist(double mu, double sigma);
ScalarDist laplace_dist(double mu, double b);
ScalarDist uniform_dist(double mu, double half_width);

// Moment-matched constructors: variance sigma^2 for every family.
ScalarDist laplace_from_sigma(double mu, double sigma);   // b = sigma/sqrt(2)
ScalarDist uniform_from_sigma(double mu, double sigma);   // w = sqrt(3) sigma

/// KL(N(mu1, sigma^2) || N(mu2, sigma^2)) = (mu1-mu2)^2 / (2 sigma^2).
double kl_gauss_gauss(double mu1, double mu2, double sigma);

/// Coordinatewise sum for mean vectors with shared sigma.
double kl_gauss_gauss(std::span<const double> mu1, std::span<const double> mu2, double sigma);

/// KL(Laplace(mu1, b1) || Laplace(mu2, b2))
///   = (b1/b2) exp(-|dmu|/b1) + |dmu|/b2 + log(b2/b1) - 1.
double kl_laplace_laplace(double mu1, double b1, double mu2, double b2);

/// KL(Uniform[mu1 +- sqrt(3) sigma] || N(mu2, sigma^2))
///   = ((mu1-mu2)^2/sigma^2 + log(pi/6) + 1) / 2.
double kl_unif_gauss(double mu1, double mu2, double sigma);

/// KL(Uniform[mu1 +- b1] || Laplace(mu2, b2)); piecewise in whether mu2
/// falls inside the uniform support, continuous at the boundary.
double kl_unif_laplace(double mu1, double b1, double mu2, double b2);

/// Quadrature oracle: integral of p log(p/q) over p's support, absolute
/// error target 1e-10. Returns +infinity when support(p) is not contained
/// in support(q).
double kl_quadrature(const ScalarDist& p, const ScalarDist& q);

}  // namespace walkdiff::divergence
