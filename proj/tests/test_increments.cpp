#include <doctest.h>

#include <cmath>

#include "walkdiff/errors.hpp"
#include "walkdiff/increments.hpp"
#include "walkdiff/quadrature.hpp"
#include "walkdiff/rng.hpp"

using namespace walkdiff;
using increments::IncrementKind;

namespace {

struct MomentStats {
  double mean = 0.0, var = 0.0, m4 = 0.0;
};

MomentStats sample_moments(IncrementKind kind, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = increments::sample_z(kind, rng);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double nn = static_cast<double>(n);
  return {s1 / nn, s2 / nn, s4 / nn};
}

}  // namespace

TEST_SUITE("increments") {

TEST_CASE("standardization: mean and variance at 4 sigma, all kinds") {
  constexpr std::size_t n = 1'000'000;
  for (auto kind : {IncrementKind::gaussian, IncrementKind::laplace, IncrementKind::uniform}) {
    CAPTURE(increments::kind_name(kind));
    const auto stats = sample_moments(kind, n, 01234);
    // 4 sigma bands: SE(mean) = 1/sqrt(n), SE(var) = sqrt((m4 - 1)/n).
    const double se_mean = 1.0 / std::sqrt(double(n));
    const double se_var = std::sqrt((increments::fourth_moment(kind) - 1.0) / double(n));
    CHECK(std::abs(stats.mean) < 4.0 * se_mean);
    CHECK(std::abs(stats.var - 1.0) < 4.0 * se_var);
  }
}

TEST_CASE("gaussian draws: 1e6 sample mean within 0.004, variance within 0.006") {
  const auto stats = sample_moments(IncrementKind::gaussian, 1'000'000, 7);
  CHECK(std::abs(stats.mean) < 0.004);
  CHECK(std::abs(stats.var - 1.0) < 0.006);
}

TEST_CASE("uniform draws stay inside the support") {
  RngStream rng(99);
  for (int i = 0; i < 100'000; ++i) {
    const double z = increments::sample_z(IncrementKind::uniform, rng);
    CHECK(std::abs(z) <= increments::kUniformHalfWidth);
  }
}

TEST_CASE("laplace fourth moment is 6 within Monte Carlo error") {
  const auto stats = sample_moments(IncrementKind::laplace, 1'000'000, 11);
  CHECK(stats.m4 == doctest::Approx(6.0).epsilon(0.025));  // +-0.15
}

TEST_CASE("fourth moments match the analytic values for every kind") {
  constexpr std::size_t n = 1'000'000;
  // SE(m4) = sqrt((m8 - m4^2)/n); m8 = 105 (gaussian), 2520 (laplace), a^8/9 = 9 (uniform).
  const double m8[] = {105.0, 2520.0, 9.0};
  const IncrementKind kinds[] = {IncrementKind::gaussian, IncrementKind::laplace,
                                 IncrementKind::uniform};
  for (int i = 0; i < 3; ++i) {
    CAPTURE(increments::kind_name(kinds[i]));
    const auto stats = sample_moments(kinds[i], n, 1000 + i);
    const double expected = increments::fourth_moment(kinds[i]);
    const double se = std::sqrt((m8[i] - expected * expected) / double(n));
    CHECK(std::abs(stats.m4 - expected) < 4.0 * se);
  }
}

TEST_CASE("density values at the mode") {
  CHECK(increments::density_z(IncrementKind::gaussian, 0.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(increments::density_z(IncrementKind::laplace, 0.0) ==
        doctest::Approx(0.7071067811865476).epsilon(1e-12));
  CHECK(increments::density_z(IncrementKind::uniform, 2.0) == 0.0);
}

TEST_CASE("densities integrate to one by quadrature") {
  for (auto kind : {IncrementKind::gaussian, IncrementKind::laplace, IncrementKind::uniform}) {
    CAPTURE(increments::kind_name(kind));
    const double kinks[] = {0.0, -increments::kUniformHalfWidth, increments::kUniformHalfWidth};
    const auto result = quadrature::integrate(
        [kind](double z) { return increments::density_z(kind, z); }, -60.0, 60.0, 1e-10, kinks);
    CHECK(std::abs(result.value - 1.0) < 1e-8);
  }
}

TEST_CASE("step_delta is deterministic when g = 0") {
  RngStream rng(1);
  const double x[] = {2.0};
  increments::StepContext ctx{x, 0, 0.1, -1.0, 0.0};
  const auto delta = increments::step_delta(ctx, IncrementKind::laplace, rng);
  CHECK(delta.size() == 1);
  CHECK(delta[0] == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("step_delta conditional moments match beta x dt and g^2 dt") {
  constexpr std::size_t n = 1'000'000;
  const double x[] = {1.5};
  for (auto kind : {IncrementKind::gaussian, IncrementKind::laplace, IncrementKind::uniform}) {
    CAPTURE(increments::kind_name(kind));
    RngStream rng(314);
    increments::StepContext ctx{x, 3, 0.25, 0.0, 1.0};
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = increments::step_delta(ctx, kind, rng)[0];
      s1 += d;
      s2 += d * d;
    }
    const double mean = s1 / double(n);
    const double var = s2 / double(n) - mean * mean;
    // Var = g^2 dt = 0.25; SE(mean) = 0.5/sqrt(n).
    CHECK(std::abs(mean - 0.0) < 4.0 * 0.5 / std::sqrt(double(n)));
    const double se_var = 0.25 * std::sqrt((increments::fourth_moment(kind) - 1.0) / double(n));
    CHECK(std::abs(var - 0.25) < 4.0 * se_var);
  }
}

TEST_CASE("conditional mean tracks beta x dt for a drifting step") {
  constexpr std::size_t n = 400'000;
  const double x[] = {2.0};
  RngStream rng(2718);
  increments::StepContext ctx{x, 0, 0.1, -1.0, 1.0};
  double s1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s1 += increments::step_delta(ctx, IncrementKind::uniform, rng)[0];
  }
  const double mean = s1 / double(n);
  const double se = std::sqrt(0.1) / std::sqrt(double(n));
  CHECK(std::abs(mean - (-0.2)) < 4.0 * se);
}

TEST_CASE("kind names round-trip and bad names are rejected") {
  for (auto kind : {IncrementKind::gaussian, IncrementKind::laplace, IncrementKind::uniform}) {
    CHECK(increments::kind_from_name(increments::kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(increments::kind_from_name("cauchy"), ConfigError);
}

TEST_CASE("child streams are independent of sibling order") {
  RngStream root(42);
  RngStream a = root.child(5);
  RngStream b = root.child(9);
  const double a1 = a.uniform01();
  RngStream a_again = root.child(5);
  CHECK(a_again.uniform01() == a1);
  CHECK(b.uniform01() != a1);
}

}  // TEST_SUITE
