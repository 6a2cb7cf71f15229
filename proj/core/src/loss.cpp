#include "walkdiff/loss.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "walkdiff/errors.hpp"
#include "walkdiff/score.hpp"
#include "walkdiff/walk.hpp"

namespace walkdiff::loss {

namespace {

double norm1(std::span<const double> r) {
  double s = 0.0;
  for (double ri : r) s += std::abs(ri);
  return s;
}

double norm2_sq(std::span<const double> r) {
  double s = 0.0;
  for (double ri : r) s += ri * ri;
  return s;
}

// exp(-x) - 1 + x, accurate near zero.
double expm1_plus(double x) { return x - (-std::expm1(-x)); }

double gaussian_log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

Pairing pairing_from_name(std::string_view name) {
  if (name == "gauss-gauss") return Pairing::gauss_gauss;
  if (name == "laplace-laplace") return Pairing::laplace_laplace;
  if (name == "unif-gauss") return Pairing::unif_gauss;
  if (name == "unif-laplace") return Pairing::unif_laplace;
  throw ConfigError("unknown pairing: " + std::string(name));
}

std::string_view pairing_name(Pairing pairing) {
  switch (pairing) {
    case Pairing::gauss_gauss: return "gauss-gauss";
    case Pairing::laplace_laplace: return "laplace-laplace";
    case Pairing::unif_gauss: return "unif-gauss";
    case Pairing::unif_laplace: return "unif-laplace";
  }
  return "?";
}

Pairing pairing_from_kinds(IncrementKind q, IncrementKind p) {
  using IK = IncrementKind;
  if (q == IK::gaussian && p == IK::gaussian) return Pairing::gauss_gauss;
  if (q == IK::laplace && p == IK::laplace) return Pairing::laplace_laplace;
  if (q == IK::uniform && p == IK::gaussian) return Pairing::unif_gauss;
  if (q == IK::uniform && p == IK::laplace) return Pairing::unif_laplace;
  throw ConfigError(std::string("unsupported pairing: q=") +
                    std::string(increments::kind_name(q)) +
                    ", p=" + std::string(increments::kind_name(p)));
}

IncrementKind q_kind(Pairing pairing) {
  switch (pairing) {
    case Pairing::gauss_gauss: return IncrementKind::gaussian;
    case Pairing::laplace_laplace: return IncrementKind::laplace;
    case Pairing::unif_gauss:
    case Pairing::unif_laplace: return IncrementKind::uniform;
  }
  return IncrementKind::gaussian;
}

IncrementKind p_kind(Pairing pairing) {
  switch (pairing) {
    case Pairing::gauss_gauss:
    case Pairing::unif_gauss: return IncrementKind::gaussian;
    case Pairing::laplace_laplace:
    case Pairing::unif_laplace: return IncrementKind::laplace;
  }
  return IncrementKind::gaussian;
}

StepWeights step_weights(const process::ProcessSpec& spec, const process::MomentTable& table) {
  const std::size_t steps = spec.grid.step_count();
  if (table.step_count() != steps) throw ConfigError("step_weights: table/grid mismatch");
  StepWeights sw;
  sw.w.assign(steps + 1, 0.0);
  sw.v.assign(steps + 1, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double g = spec.schedule.g(spec.grid.times[k - 1]);
    const double dt = spec.grid.delta(k - 1);
    const double sigma = table.sigma(k);
    if (!(sigma > 0.0)) {
      throw NumericError("step_weights: sigma vanishes at k=" + std::to_string(k));
    }
    sw.w[k] = g * g * dt / (2.0 * sigma * sigma);
    sw.v[k] = g * std::sqrt(dt) / sigma;
  }
  return sw;
}

double uniform_gauss_penalty() {
  return 0.5 * (1.0 + std::log(std::numbers::pi / 6.0));
}

double loss_gaussian(std::span<const double> r, double w) { return w * norm2_sq(r); }

double loss_laplace(std::span<const double> r, double v) {
  if (!(v > 0.0)) throw ConfigError("loss_laplace: v must be positive");
  return expm1_plus(v * norm1(r));
}

double loss_unif_gauss(std::span<const double> r, double w) {
  return w * norm2_sq(r) + static_cast<double>(r.size()) * uniform_gauss_penalty();
}

double loss_unif_laplace(std::span<const double> r, double w, double v) {
  // Region A per coordinate: the standardized residual inside the uniform
  // support, |r_i| <= sqrt(3).
  double total = 0.0;
  for (double ri : r) {
    if (std::abs(ri) <= increments::kUniformHalfWidth) {
      total += w * ri * ri + 0.5;
    } else {
      total += v * std::abs(ri);
    }
  }
  return total;
}

double loss_eval(Pairing pairing, std::span<const double> r, double w, double v) {
  switch (pairing) {
    case Pairing::gauss_gauss: return loss_gaussian(r, w);
    case Pairing::laplace_laplace: return loss_laplace(r, v);
    case Pairing::unif_gauss: return loss_unif_gauss(r, w);
    case Pairing::unif_laplace: return loss_unif_laplace(r, w, v);
  }
  return 0.0;
}

void loss_grad_r(Pairing pairing, std::span<const double> r, double w, double v,
                 std::span<double> grad) {
  if (grad.size() != r.size()) throw ConfigError("loss_grad_r: size mismatch");
  switch (pairing) {
    case Pairing::gauss_gauss:
    case Pairing::unif_gauss:
      for (std::size_t i = 0; i < r.size(); ++i) grad[i] = 2.0 * w * r[i];
      return;
    case Pairing::laplace_laplace: {
      const double factor = v * (-std::expm1(-v * norm1(r)));  // v (1 - e^{-v|r|_1})
      for (std::size_t i = 0; i < r.size(); ++i) {
        grad[i] = r[i] > 0.0 ? factor : (r[i] < 0.0 ? -factor : 0.0);
      }
      return;
    }
    case Pairing::unif_laplace:
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::abs(r[i]) <= increments::kUniformHalfWidth) {
          grad[i] = 2.0 * w * r[i];
        } else {
          grad[i] = r[i] > 0.0 ? v : -v;
        }
      }
      return;
  }
}

std::vector<double> eps_from_score(std::span<const double> s, double sigma) {
  std::vector<double> eps(s.begin(), s.end());
  for (auto& e : eps) e *= sigma;
  return eps;
}

std::vector<double> score_from_eps(std::span<const double> eps, double sigma) {
  std::vector<double> s(eps.begin(), eps.end());
  for (auto& si : s) si /= sigma;
  return s;
}

nlohmann::json elbo_to_json(const ElboReport& report) {
  return nlohmann::json{
      {"L0", report.l0},
      {"Lk", std::vector<double>(report.lk_terms.begin() + 1, report.lk_terms.end())},
      {"LT", report.lt},
      {"total", report.total},
      {"total_stderr", report.total_stderr},
      {"batch", report.batch},
  };
}

ElboReport elbo(std::span<const double> x0_batch, std::size_t dim, const score::ScoreModel& model,
                const process::ProcessSpec& spec, const process::MomentTable& table,
                IncrementKind q, IncrementKind p, RngStream& rng, const ElboOptions& options) {
  const Pairing pairing = pairing_from_kinds(q, p);
  if (dim == 0 || x0_batch.size() % dim != 0) throw ConfigError("elbo: bad batch shape");
  const std::size_t batch = x0_batch.size() / dim;
  if (batch == 0) throw ConfigError("elbo: empty batch");
  const std::size_t steps = spec.grid.step_count();
  const StepWeights weights = step_weights(spec, table);
  const std::size_t reps = std::max<std::size_t>(1, options.replicates);

  const double dt0 = spec.grid.delta(0);
  const double t1 = spec.grid.times[1];
  const double recon_sigma =
      options.recon_sigma > 0.0 ? options.recon_sigma : spec.schedule.g(t1) * std::sqrt(dt0);

  ElboReport report;
  report.lk_terms.assign(steps + 1, 0.0);
  report.batch = batch;

  double sum_total = 0.0, sum_total_sq = 0.0;
  std::vector<double> r(dim);
  std::size_t draws = 0;

  for (std::size_t bi = 0; bi < batch; ++bi) {
    const std::span<const double> x0{x0_batch.data() + bi * dim, dim};
    for (std::size_t rep = 0; rep < reps; ++rep) {
      RngStream path_rng = rng.child(bi * 65536 + rep);
      const walk::WalkPath path = walk::simulate_forward(spec, q, x0, path_rng);

      // L_k, k = 1..T: pairing loss of the source-noise residual.
      double lk_sum = 0.0;
      for (std::size_t k = 1; k <= steps; ++k) {
        const auto xk = path.state(k);
        const double sigma_k = table.sigma(k);
        const auto s_theta = model.score(xk, spec.grid.times[k]);
        for (std::size_t i = 0; i < dim; ++i) {
          const double noise = (xk[i] - table.alpha_bar[k] * x0[i]) / sigma_k;
          r[i] = -noise - sigma_k * s_theta[i];
        }
        const double lk = loss_eval(pairing, r, weights.w[k], weights.v[k]);
        report.lk_terms[k] += lk;
        lk_sum += lk;
      }

      // L0: gaussian reconstruction density of x0 under the reverse step from x_1.
      const auto x1 = path.state(1);
      const auto s1 = model.score(x1, t1);
      const double beta1 = spec.schedule.beta(t1);
      const double g1 = spec.schedule.g(t1);
      double l0 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double mean = x1[i] - (beta1 * x1[i] - g1 * g1 * s1[i]) * dt0;
        l0 += gaussian_log_pdf(x0[i], mean, recon_sigma);
      }

      // L_T: KL(N(alpha_bar_T x0, gamma_bar_T) || N(0, 1)) per coordinate.
      const double at = table.alpha_bar[steps];
      const double gt = table.gamma_bar[steps];
      double lt = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double m = at * x0[i];
        lt += 0.5 * (gt + m * m - 1.0 - std::log(gt));
      }

      const double total = l0 - lk_sum - lt;
      report.l0 += l0;
      report.lt += lt;
      sum_total += total;
      sum_total_sq += total * total;
      ++draws;
    }
  }

  const double n = static_cast<double>(draws);
  report.l0 /= n;
  report.lt /= n;
  for (auto& lk : report.lk_terms) lk /= n;
  report.total = sum_total / n;
  const double var = std::max(sum_total_sq / n - report.total * report.total, 0.0);
  report.total_stderr = std::sqrt(var / n);
  return report;
}

}  // namespace walkdiff::loss
