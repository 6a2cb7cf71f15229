#include "walkdiff/divergence.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "walkdiff/errors.hpp"
#include "walkdiff/quadrature.hpp"

namespace walkdiff::divergence {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Effective integration range: Gaussian tails beyond 16 sigma and Laplace
// tails beyond 60 b contribute far below the 1e-10 error target.
constexpr double kGaussianTail = 16.0;
constexpr double kLaplaceTail = 60.0;

void require_positive_scale(double s, const char* who) {
  if (!(s > 0.0)) throw ConfigError(std::string(who) + ": scale must be positive");
}

}  // namespace

double ScalarDist::pdf(double x) const {
  switch (family) {
    case Family::gaussian: {
      const double z = (x - mu) / scale;
      return std::exp(-0.5 * z * z) / (scale * std::sqrt(2.0 * std::numbers::pi));
    }
    case Family::laplace:
      return std::exp(-std::abs(x - mu) / scale) / (2.0 * scale);
    case Family::uniform:
      return std::abs(x - mu) <= scale ? 1.0 / (2.0 * scale) : 0.0;
  }
  return 0.0;
}

double ScalarDist::log_pdf(double x) const {
  switch (family) {
    case Family::gaussian: {
      const double z = (x - mu) / scale;
      return -0.5 * z * z - std::log(scale) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    case Family::laplace:
      return -std::abs(x - mu) / scale - std::log(2.0 * scale);
    case Family::uniform:
      return std::abs(x - mu) <= scale ? -std::log(2.0 * scale) : -kInf;
  }
  return -kInf;
}

double ScalarDist::support_lo() const {
  return family == Family::uniform ? mu - scale : -kInf;
}

double ScalarDist::support_hi() const {
  return family == Family::uniform ? mu + scale : kInf;
}

ScalarDist gaussian_dist(double mu, double sigma) {
  require_positive_scale(sigma, "gaussian_dist");
  return ScalarDist{Family::gaussian, mu, sigma};
}

ScalarDist laplace_dist(double mu, double b) {
  require_positive_scale(b, "laplace_dist");
  return ScalarDist{Family::laplace, mu, b};
}

ScalarDist uniform_dist(double mu, double half_width) {
  require_positive_scale(half_width, "uniform_dist");
  return ScalarDist{Family::uniform, mu, half_width};
}

ScalarDist laplace_from_sigma(double mu, double sigma) {
  return laplace_dist(mu, sigma / std::sqrt(2.0));
}

ScalarDist uniform_from_sigma(double mu, double sigma) {
  return uniform_dist(mu, std::sqrt(3.0) * sigma);
}

double kl_gauss_gauss(double mu1, double mu2, double sigma) {
  require_positive_scale(sigma, "kl_gauss_gauss");
  const double d = mu1 - mu2;
  return d * d / (2.0 * sigma * sigma);
}

double kl_gauss_gauss(std::span<const double> mu1, std::span<const double> mu2, double sigma) {
  if (mu1.size() != mu2.size()) throw ConfigError("kl_gauss_gauss: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) total += kl_gauss_gauss(mu1[i], mu2[i], sigma);
  return total;
}

double kl_laplace_laplace(double mu1, double b1, double mu2, double b2) {
  require_positive_scale(b1, "kl_laplace_laplace");
  require_positive_scale(b2, "kl_laplace_laplace");
  const double d = std::abs(mu1 - mu2);
  return (b1 / b2) * std::exp(-d / b1) + d / b2 + std::log(b2 / b1) - 1.0;
}

double kl_unif_gauss(double mu1, double mu2, double sigma) {
  require_positive_scale(sigma, "kl_unif_gauss");
  const double d = (mu1 - mu2) / sigma;
  return 0.5 * (d * d + std::log(std::numbers::pi / 6.0) + 1.0);
}

double kl_unif_laplace(double mu1, double b1, double mu2, double b2) {
  require_positive_scale(b1, "kl_unif_laplace");
  require_positive_scale(b2, "kl_unif_laplace");
  const double d = std::abs(mu1 - mu2);
  if (d <= b1) {
    return std::log(b2 / b1) + (d * d + b1 * b1) / (2.0 * b1 * b2);
  }
  return std::log(b2 / b1) + d / b2;
}

double kl_quadrature(const ScalarDist& p, const ScalarDist& q) {
  if (p.support_lo() < q.support_lo() || p.support_hi() > q.support_hi()) {
    return kInf;
  }

  double lo, hi;
  switch (p.family) {
    case Family::gaussian:
      lo = p.mu - kGaussianTail * p.scale;
      hi = p.mu + kGaussianTail * p.scale;
      break;
    case Family::laplace:
      lo = p.mu - kLaplaceTail * p.scale;
      hi = p.mu + kLaplaceTail * p.scale;
      break;
    case Family::uniform:
      lo = p.mu - p.scale;
      hi = p.mu + p.scale;
      break;
  }

  std::vector<double> kinks;
  if (p.family == Family::laplace) kinks.push_back(p.mu);
  if (q.family == Family::laplace) kinks.push_back(q.mu);
  if (q.family == Family::uniform) {
    kinks.push_back(q.support_lo());
    kinks.push_back(q.support_hi());
  }

  const auto integrand = [&](double x) {
    const double px = p.pdf(x);
    if (px <= 0.0) return 0.0;
    return px * (p.log_pdf(x) - q.log_pdf(x));
  };
  return quadrature::integrate(integrand, lo, hi, 1e-10, kinks).value;
}

}  // namespace walkdiff::divergence
