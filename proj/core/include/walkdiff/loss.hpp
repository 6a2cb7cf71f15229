#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "walkdiff/increments.hpp"
#include "walkdiff/process.hpp"
#include "walkdiff/rng.hpp"

namespace walkdiff::score {
class ScoreModel;
}

namespace walkdiff::loss {

using increments::IncrementKind;

/// Supported (q, p_theta) increment-family pairings.
enum class Pairing { gauss_gauss, laplace_laplace, unif_gauss, unif_laplace };

Pairing pairing_from_name(std::string_view name);
std::string_view pairing_name(Pairing pairing);
Pairing pairing_from_kinds(IncrementKind q_kind, IncrementKind p_kind);
IncrementKind q_kind(Pairing pairing);
IncrementKind p_kind(Pairing pairing);

/// Per-step loss weights for k = 1..T (index 0 unused):
///   w_k = g^2 dt / (2 sigma_k^2),  v_k = g sqrt(dt) / sigma_k,
/// with g, dt taken on the step into k and sigma_k = sqrt(gamma_bar[k]).
/// The identity v_k^2 = 2 w_k holds by construction.
struct StepWeights {
  std::vector<double> w;
  std::vector<double> v;
};

StepWeights step_weights(const process::ProcessSpec& spec, const process::MomentTable& table);

/// Per-coordinate mismatch constant of the uniform-q/gaussian-p loss,
/// (1 + log(pi/6)) / 2.
double uniform_gauss_penalty();

// Residual r = eps - eps_theta(x_k, t_k); every loss is >= 0.
double loss_gaussian(std::span<const double> r, double w);                    // w |r|^2
double loss_laplace(std::span<const double> r, double v);                     // exp(-v|r|_1) - 1 + v|r|_1
double loss_unif_gauss(std::span<const double> r, double w);                  // w |r|^2 + d C
double loss_unif_laplace(std::span<const double> r, double w, double v);      // piecewise per coordinate

double loss_eval(Pairing pairing, std::span<const double> r, double w, double v);

/// Gradient of the per-sample loss with respect to r; the L1 subgradient at
/// r_i = 0 is 0.
void loss_grad_r(Pairing pairing, std::span<const double> r, double w, double v,
                 std::span<double> grad);

// The score/noise conversion eps = sigma * s lives here and nowhere else.
std::vector<double> eps_from_score(std::span<const double> s, double sigma);
std::vector<double> score_from_eps(std::span<const double> eps, double sigma);

/// Likelihood-bound decomposition: total = L0 - sum(Lk) - LT, batch means.
struct ElboReport {
  double l0 = 0.0;
  std::vector<double> lk_terms;  // index 1..T used
  double lt = 0.0;
  double total = 0.0;
  double total_stderr = 0.0;
  std::size_t batch = 0;
};

nlohmann::json elbo_to_json(const ElboReport& report);

struct ElboOptions {
  /// Reconstruction std for L0; <= 0 selects g(t_1) sqrt(dt_0).
  double recon_sigma = 0.0;
  /// Forward-path Monte Carlo replicates per data point.
  std::size_t replicates = 1;
};

/// Monte Carlo evaluation of the bound on a batch of data points (row-major
/// batch x dim). The forward paths use the pairing's q kind; residuals use
/// the sampled source noise against eps_theta = sigma * model score.
ElboReport elbo(std::span<const double> x0_batch, std::size_t dim, const score::ScoreModel& model,
                const process::ProcessSpec& spec, const process::MomentTable& table,
                IncrementKind q, IncrementKind p, RngStream& rng, const ElboOptions& options = {});

}  // namespace walkdiff::loss
