#include <doctest.h>

#include <cmath>
#include <vector>

#include "walkdiff/errors.hpp"
#include "walkdiff/process.hpp"
#include "walkdiff/rng.hpp"

using namespace walkdiff;
using process::build_grid;
using process::make_process;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_SUITE("process") {

TEST_CASE("uniform grid: exact partition") {
  const auto grid = build_grid(std::size_t{4});
  REQUIRE(grid.times.size() == 5);
  CHECK(grid.times == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  double sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) sum += grid.delta(k);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("single-step grid") {
  const auto grid = build_grid(std::size_t{1});
  CHECK(grid.step_count() == 1);
  CHECK(grid.delta(0) == 1.0);
}

TEST_CASE("custom grid deltas") {
  const auto grid = build_grid(std::vector<double>{0.0, 0.9, 1.0});
  CHECK(grid.delta(0) == doctest::Approx(0.9));
  CHECK(grid.delta(1) == doctest::Approx(0.1));
}

TEST_CASE("grid preconditions") {
  CHECK_THROWS_AS(build_grid(std::size_t{0}), ConfigError);
  CHECK_THROWS_AS(build_grid(std::vector<double>{0.0, 0.5, 0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(build_grid(std::vector<double>{0.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(build_grid(std::vector<double>{0.1, 1.0}), ConfigError);
}

TEST_CASE("moments: pure diffusion accumulates g^2 dt") {
  const auto spec = make_process(process::constant_schedule(0.0, 1.0), build_grid(std::size_t{4}));
  const auto table = process::moments(spec);
  CHECK(table.alpha_bar[0] == 1.0);
  CHECK(table.gamma_bar[0] == 0.0);
  CHECK(table.alpha_bar[4] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(table.gamma_bar[4] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("moments: contraction without noise approaches exp(beta)") {
  for (std::size_t steps : {1000ul, 4000ul}) {
    const auto spec = make_process(process::constant_schedule(-1.0, 0.0), build_grid(steps));
    const auto table = process::moments(spec);
    // (1 - 1/T)^T -> e^{-1} with O(1/T) gap.
    CHECK(std::abs(table.alpha_bar[steps] - std::exp(-1.0)) < 0.3 / double(steps));
    CHECK(table.gamma_bar[steps] == 0.0);
  }
}

TEST_CASE("recursion and explicit product/sum forms agree on random specs") {
  RngStream rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    const double beta0 = -3.0 * rng.uniform01();
    const double g0 = 0.2 + 2.0 * rng.uniform01();
    const std::size_t steps = 5 + static_cast<std::size_t>(rng.uniform01() * 60.0);
    const auto spec = make_process(process::constant_schedule(beta0, g0), build_grid(steps));
    const auto a = process::moments(spec);
    const auto b = process::moments_explicit(spec);
    for (std::size_t k = 0; k <= steps; ++k) {
      CHECK(a.alpha_bar[k] == doctest::Approx(b.alpha_bar[k]).epsilon(1e-10));
      if (a.gamma_bar[k] > 0.0) {
        CHECK(a.gamma_bar[k] == doctest::Approx(b.gamma_bar[k]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("explicit form rejects a vanishing (1 + beta dt) factor") {
  // beta dt = -1 exactly at every step.
  const auto spec = make_process(process::constant_schedule(-4.0, 1.0), build_grid(std::size_t{4}));
  CHECK_THROWS_AS(process::moments_explicit(spec), NumericError);
  const auto table = process::moments(spec);  // recursion flags alpha = 0 instead
  CHECK(table.alpha_bar[1] == 0.0);
  CHECK(table.alpha_bar[4] == 0.0);
  CHECK(table.gamma_bar[4] > 0.0);
}

TEST_CASE("gamma_bar is nondecreasing when g > 0 and beta <= 0") {
  RngStream rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = make_process(
        process::constant_schedule(-2.0 * rng.uniform01(), 0.1 + rng.uniform01()),
        build_grid(std::size_t{64}));
    const auto table = process::moments(spec);
    for (std::size_t k = 0; k + 1 <= table.step_count(); ++k) {
      CHECK(table.gamma_bar[k + 1] >= table.gamma_bar[k]);
    }
  }
}

TEST_CASE("ddpm adapter: no noise and the two-step hand value") {
  const double none[] = {0.0};
  const auto t0 = process::ddpm_moments(none);
  CHECK(t0.alpha_bar[1] == 1.0);
  CHECK(t0.gamma_bar[1] == 0.0);

  const double halves[] = {0.5, 0.5};
  const auto t1 = process::ddpm_moments(halves);
  CHECK(t1.alpha_bar[2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t1.gamma_bar[2] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("ddpm identity gamma_bar = 1 - alpha_bar^2 to 1e-10") {
  RngStream rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> betas(1 + static_cast<std::size_t>(rng.uniform01() * 999.0));
    for (auto& b : betas) b = 1e-4 + 0.9 * rng.uniform01();
    const auto table = process::ddpm_moments(betas);
    CHECK(process::ddpm_identity_gap(table) < 1e-10);
  }
  const double bad[] = {1.5};
  CHECK_THROWS_AS(process::ddpm_moments(bad), ConfigError);
}

TEST_CASE("vdm adapter: constant gamma gives alpha^2 = sigma^2 = 1/2") {
  const auto grid = build_grid(std::size_t{8});
  const auto table = process::vdm_moments([](double) { return 0.0; }, grid);
  CHECK(table.alpha_bar[0] == 1.0);
  CHECK(table.gamma_bar[0] == 0.0);
  for (std::size_t k = 1; k <= 8; ++k) {
    CHECK(table.alpha_bar[k] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(table.gamma_bar[k] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("vdm adapter: recursion matches the sigmoid closed forms to 1e-9") {
  const auto grid = build_grid(std::size_t{16});
  const auto gamma_fn = [](double t) { return -5.0 + 10.0 * t; };
  const auto table = process::vdm_moments(gamma_fn, grid);
  for (std::size_t k = 1; k <= 16; ++k) {
    const double gm = gamma_fn(grid.times[k]);
    CHECK(std::abs(table.alpha_bar[k] - std::sqrt(sigmoid(-gm))) < 1e-9);
    CHECK(std::abs(table.gamma_bar[k] - sigmoid(gm)) < 1e-9);
  }
}

TEST_CASE("schedule continuous moments match fine-grid tables") {
  const process::ScheduleSpec schedules[] = {
      process::constant_schedule(-5.0, std::sqrt(10.0)),
      process::ddpm_linear_schedule(0.1, 20.0),
      process::vdm_schedule(-6.0, 6.0),
  };
  for (const auto& schedule : schedules) {
    const auto spec = make_process(schedule, build_grid(std::size_t{20000}));
    const auto table = process::moments(spec);
    const std::size_t steps = spec.grid.step_count();
    for (std::size_t k : {steps / 4, steps / 2, steps}) {
      const double t = spec.grid.times[k];
      CHECK(table.alpha_bar[k] == doctest::Approx(schedule.alpha_bar(t)).epsilon(2e-3));
      CHECK(std::abs(table.gamma_bar[k] - schedule.gamma_bar(t)) < 2e-3);
    }
  }
}

TEST_CASE("drift and diffusion evaluations are Lipschitz with the recorded constant") {
  const process::ScheduleSpec schedules[] = {
      process::constant_schedule(-2.0, 1.5),
      process::ddpm_linear_schedule(0.1, 20.0),
      process::vdm_schedule(-6.0, 6.0),
  };
  RngStream rng(8);
  for (const auto& schedule : schedules) {
    const process::DriftSpec drift{schedule};
    const process::DiffusionSpec diffusion{schedule};
    for (int i = 0; i < 200; ++i) {
      const double t = rng.uniform01(), s = rng.uniform01();
      CHECK(std::abs(drift.beta(t) - drift.beta(s)) <= drift.lipschitz() * std::abs(t - s) + 1e-12);
      CHECK(std::abs(diffusion.g(t) - diffusion.g(s)) <=
            diffusion.lipschitz() * std::abs(t - s) + 1e-12);
      CHECK(diffusion.g(t) >= 0.0);
      CHECK(std::isfinite(drift.beta(t)));
    }
  }
}

TEST_CASE("schedule JSON round-trip") {
  const auto spec = make_process(process::vdm_schedule(-6.0, 6.0), build_grid(std::size_t{64}));
  const auto j = process::process_to_json(spec);
  CHECK(j.at("kind") == "vdm");
  CHECK(j.at("T") == 64);
  CHECK(j.at("spacing") == "uniform");
  const auto back = process::process_from_json(j);
  CHECK(back.grid.times == spec.grid.times);
  CHECK(back.schedule.kind == spec.schedule.kind);
  CHECK(back.schedule.a == spec.schedule.a);
  CHECK(back.schedule.b == spec.schedule.b);

  const auto custom = make_process(process::constant_schedule(0.0, 1.0),
                                   build_grid(std::vector<double>{0.0, 0.9, 1.0}));
  const auto j2 = process::process_to_json(custom);
  const auto back2 = process::process_from_json(j2);
  CHECK(back2.grid.times == custom.grid.times);
}

}  // TEST_SUITE
