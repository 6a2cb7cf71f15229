#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "walkdiff/loss.hpp"
#include "walkdiff/process.hpp"
#include "walkdiff/rng.hpp"

namespace walkdiff::score {

/// Score function s(x, t) of the forward marginal at continuous time t.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual std::vector<double> score(std::span<const double> x, double t) const = 0;
  virtual std::size_t dim() const = 0;
};

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> var;  // diagonal covariance
};

/// Gaussian mixture with diagonal covariances; the toy data family.
struct GaussianMixture {
  std::vector<MixtureComponent> components;

  std::size_t dim() const { return components.empty() ? 0 : components.front().mean.size(); }
  void validate() const;

  std::vector<double> sample(RngStream& rng) const;
  double log_density(std::span<const double> x) const;
  std::vector<double> score_at(std::span<const double> x) const;

  /// Marginal mixture of the linear forward process: means scaled by
  /// alpha_bar, variances alpha_bar^2 var + gamma_bar.
  GaussianMixture propagate(double alpha_bar, double gamma_bar) const;
};

nlohmann::json mixture_to_json(const GaussianMixture& mix);
GaussianMixture mixture_from_json(const nlohmann::json& j);

/// Exact score of the time-k marginal from the discrete moment table.
std::vector<double> analytic_score(const GaussianMixture& mix, const process::MomentTable& table,
                                   std::span<const double> x, std::size_t k);

/// ScoreModel over the continuous-time moments of a schedule.
class AnalyticMixtureScore : public ScoreModel {
 public:
  AnalyticMixtureScore(GaussianMixture mix, process::ScheduleSpec schedule);
  std::vector<double> score(std::span<const double> x, double t) const override;
  std::size_t dim() const override { return mix_.dim(); }
  const GaussianMixture& mixture() const { return mix_; }

 private:
  GaussianMixture mix_;
  process::ScheduleSpec schedule_;
};

/// d+1 -> H -> H -> d fully connected tanh network; the time coordinate is
/// appended to the input as a raw feature. Parameters live in one flat
/// vector (layer weights row-major, then biases, layer by layer).
class MlpDenoiser {
 public:
  MlpDenoiser(std::size_t dim, std::size_t hidden);

  static MlpDenoiser random_init(std::size_t dim, std::size_t hidden, RngStream& rng);

  std::size_t dim() const { return dim_; }
  std::size_t hidden() const { return hidden_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Deterministic forward pass; returns eps_hat.
  std::vector<double> forward(std::span<const double> x, double t) const;

  nlohmann::json to_json() const;
  static MlpDenoiser from_json(const nlohmann::json& j);

 private:
  friend std::vector<double> mlp_gradients(const MlpDenoiser&, std::span<const struct TrainSample>,
                                           loss::Pairing);
  std::size_t dim_, hidden_;
  std::vector<double> params_;
};

struct TrainSample {
  std::vector<double> x;    // x_k
  double t = 0.0;           // t_k
  std::vector<double> eps;  // residual target
  double w = 0.0;           // step weight w_k
  double v = 0.0;           // step weight v_k
};

/// Analytic gradient of the batch-mean pairing loss with respect to all
/// parameters, in the flat layout of MlpDenoiser::parameters().
std::vector<double> mlp_gradients(const MlpDenoiser& model, std::span<const TrainSample> batch,
                                  loss::Pairing pairing);

struct TrainConfig {
  loss::Pairing pairing = loss::Pairing::gauss_gauss;
  std::size_t steps = 20000;
  std::size_t batch_size = 32;
  std::size_t hidden = 64;
  double learning_rate = 0.02;
  std::uint64_t seed = 1;
  /// Sample x_k by exact forward simulation (default) or by the
  /// moment-matched gaussian shortcut.
  bool exact_forward = true;
  double divergence_guard = 1e6;
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& cfg);

struct TrainResult {
  MlpDenoiser model;
  std::vector<double> loss_trace;  // one entry per step
};

/// Plain SGD on the pairing loss with k uniform over 1..T. The regression
/// target for step k is eps = -(x_k - alpha_bar_k x_0)/sigma_k, so a trained
/// model predicts sigma * (marginal score). Throws NumericError when the
/// running loss passes the divergence guard.
TrainResult train(const GaussianMixture& data, const process::ProcessSpec& spec,
                  const TrainConfig& cfg);

/// ScoreModel view of a denoiser: s(x, t) = eps_hat(x, t) / sigma(t), with
/// sigma clamped below by sigma_floor to keep the t -> 0 endpoint finite.
class MlpScore : public ScoreModel {
 public:
  MlpScore(MlpDenoiser model, process::ScheduleSpec schedule, double sigma_floor = 1e-3);
  std::vector<double> score(std::span<const double> x, double t) const override;
  std::size_t dim() const override { return model_.dim(); }
  const MlpDenoiser& model() const { return model_; }

 private:
  MlpDenoiser model_;
  process::ScheduleSpec schedule_;
  double sigma_floor_;
};

}  // namespace walkdiff::score
