#include <doctest.h>

#include <cmath>
#include <vector>

#include "walkdiff/analysis.hpp"
#include "walkdiff/errors.hpp"
#include "walkdiff/rng.hpp"

using namespace walkdiff;
using analysis::EnergyOptions;

TEST_SUITE("analysis") {

TEST_CASE("ks: identical samples give zero statistic") {
  std::vector<double> a(100);
  RngStream rng(3);
  for (auto& x : a) x = rng.normal();
  const auto r = analysis::ks_two_sample(a, a);
  CHECK(r.statistic == 0.0);
  CHECK_FALSE(r.reject_1pct);
}

TEST_CASE("ks: gross mean shift is rejected at 1%") {
  RngStream rng(17);
  std::vector<double> a(10'000), b(10'000);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = 3.0 + rng.normal();
  const auto r = analysis::ks_two_sample(a, b);
  CHECK(r.reject_1pct);
  CHECK(r.statistic > 0.5);
}

TEST_CASE("ks: critical value formula") {
  RngStream rng(18);
  std::vector<double> a(100), b(400);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  const auto r = analysis::ks_two_sample(a, b);
  CHECK(r.critical_1pct ==
        doctest::Approx(1.6276236307187293 * std::sqrt(500.0 / 40000.0)).epsilon(1e-9));
  CHECK(r.critical_5pct == doctest::Approx(1.3581015157406195 * std::sqrt(500.0 / 40000.0)).epsilon(1e-9));
  CHECK_THROWS_AS(analysis::ks_two_sample(std::vector<double>(5, 0.0), b), ConfigError);
}

TEST_CASE("ks: size calibration, rejection rate at most 3% at nominal 1%") {
  RngStream root(20250601);
  int rejects = 0;
  std::vector<double> a(10'000), b(10'000);
  for (int rep = 0; rep < 100; ++rep) {
    RngStream rng = root.child(rep);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    if (analysis::ks_two_sample(a, b).reject_1pct) ++rejects;
  }
  CHECK(rejects <= 3);
}

TEST_CASE("energy: identical sets give zero") {
  RngStream rng(5);
  std::vector<double> a(50 * 2);
  for (auto& x : a) x = rng.normal();
  EnergyOptions opt;
  opt.permutations = 50;
  RngStream perm_rng(100);
  const auto r = analysis::energy_distance(a, a, 2, perm_rng, opt);
  CHECK(std::abs(r.statistic) < 1e-6);
  CHECK_FALSE(r.reject_1pct);
}

TEST_CASE("energy: disjoint point masses at distance 1 give statistic 2") {
  std::vector<double> a(20, 0.0), b(20, 1.0);
  EnergyOptions opt;
  opt.permutations = 50;
  RngStream rng(1);
  const auto r = analysis::energy_distance(a, b, 1, rng, opt);
  CHECK(r.statistic == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(r.p_value <= 0.05);
}

TEST_CASE("energy: separated gaussians are rejected, matched ones are not") {
  RngStream rng(23);
  const std::size_t n = 600;
  std::vector<double> a(n * 2), b(n * 2), c(n * 2);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.0 + rng.normal();
  RngStream t1(101), t2(102);
  CHECK_FALSE(analysis::energy_distance(a, b, 2, t1).reject_1pct);
  CHECK(analysis::energy_distance(a, c, 2, t2).reject_1pct);
}

TEST_CASE("energy: threaded permutation loop matches single-threaded p-value") {
  RngStream rng(31);
  const std::size_t n = 300;
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = 0.15 + rng.normal();
  EnergyOptions seq, par;
  seq.threads = 1;
  par.threads = 4;
  RngStream r1(7), r2(7);
  const auto s = analysis::energy_distance(a, b, 1, r1, seq);
  const auto p = analysis::energy_distance(a, b, 1, r2, par);
  CHECK(s.p_value == p.p_value);
  CHECK(s.statistic == p.statistic);
}

TEST_CASE("energy: size calibration at n = m = 5000, 100 replicates" * doctest::timeout(1200)) {
  RngStream root(424242);
  int rejects = 0;
  const std::size_t n = 5000;
  std::vector<double> a(n * 2), b(n * 2);
  for (int rep = 0; rep < 100; ++rep) {
    RngStream rng = root.child(rep);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    RngStream perm_rng = root.child(10'000 + rep);
    if (analysis::energy_distance(a, b, 2, perm_rng).reject_1pct) ++rejects;
  }
  CHECK(rejects <= 3);
}

TEST_CASE("moment_check: brownian slice passes, injected bias fails") {
  RngStream rng(55);
  const std::size_t n = 100'000;
  std::vector<double> slice(n);
  for (auto& x : slice) x = rng.normal();
  const double mean0[] = {0.0};
  CHECK(analysis::moment_check(slice, 1, mean0, 1.0).pass);

  for (auto& x : slice) x += 0.1;
  const auto biased = analysis::moment_check(slice, 1, mean0, 1.0);
  CHECK_FALSE(biased.pass);
  CHECK(biased.z_mean[0] == doctest::Approx(31.6).epsilon(0.05));
}

TEST_CASE("moment_check: zero-variance branch compares exactly") {
  std::vector<double> slice(200, 0.7);
  const double mean[] = {0.7};
  const auto r = analysis::moment_check(slice, 1, mean, 0.0);
  CHECK(r.pass);
  CHECK(std::isnan(r.z_var[0]));
  slice[3] = 0.7000001;
  CHECK_FALSE(analysis::moment_check(slice, 1, mean, 0.0).pass);
}

TEST_CASE("sweep helpers: medians and log-log slope") {
  analysis::SweepTable table;
  const std::size_t t_list[] = {8, 32};
  table.rows = {{8, 0.4, 0, 0}, {8, 0.2, 1, 0}, {8, 0.3, 2, 0}, {32, 0.1, 0, 0}, {32, 0.05, 1, 0}};
  const auto med = table.medians(t_list);
  CHECK(med[0] == doctest::Approx(0.3));
  CHECK(med[1] == doctest::Approx(0.075));
  const double slope = analysis::sweep_loglog_slope(t_list, med);
  CHECK(slope == doctest::Approx(std::log(0.075 / 0.3) / std::log(4.0)));
}

TEST_CASE("sweep: gaussian kind against gaussian reference sits at the noise floor") {
  RngStream rng(606);
  const std::size_t t_list[] = {8, 32};
  const double x0[] = {1.0};
  const auto table = analysis::convergence_sweep(
      increments::IncrementKind::gaussian, t_list, process::constant_schedule(-5.0, std::sqrt(10.0)),
      analysis::SweepMetric::ks, 6, 20'000, x0, rng);
  const auto med = table.medians(t_list);
  const double crit = 1.6276236307187293 * std::sqrt(2.0 / 20'000.0);
  CHECK(med[0] < crit);
  CHECK(med[1] < crit);
}

}  // TEST_SUITE
