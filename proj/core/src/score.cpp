#include "walkdiff/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "walkdiff/errors.hpp"
#include "walkdiff/increments.hpp"

namespace walkdiff::score {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Layout {
  std::size_t w1, b1, w2, b2, w3, b3, total;
};

Layout layout(std::size_t dim, std::size_t hidden) {
  const std::size_t in = dim + 1;
  Layout l{};
  l.w1 = 0;
  l.b1 = l.w1 + hidden * in;
  l.w2 = l.b1 + hidden;
  l.b2 = l.w2 + hidden * hidden;
  l.w3 = l.b2 + hidden;
  l.b3 = l.w3 + dim * hidden;
  l.total = l.b3 + dim;
  return l;
}

}  // namespace

void GaussianMixture::validate() const {
  if (components.empty()) throw ConfigError("mixture: needs at least one component");
  const std::size_t d = dim();
  double weight_sum = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw ConfigError("mixture: weights must be positive");
    if (c.mean.size() != d || c.var.size() != d) throw ConfigError("mixture: ragged dimensions");
    for (double v : c.var) {
      if (!(v > 0.0)) throw ConfigError("mixture: variances must be positive");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-6) throw ConfigError("mixture: weights must sum to 1");
}

std::vector<double> GaussianMixture::sample(RngStream& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  const MixtureComponent* chosen = &components.back();
  for (const auto& c : components) {
    acc += c.weight;
    if (u < acc) {
      chosen = &c;
      break;
    }
  }
  std::vector<double> x(dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = chosen->mean[i] + std::sqrt(chosen->var[i]) * rng.normal();
  }
  return x;
}

double GaussianMixture::log_density(std::span<const double> x) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(components.size());
  for (std::size_t j = 0; j < components.size(); ++j) {
    const auto& c = components[j];
    double lp = std::log(c.weight);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c.mean[i];
      lp += -0.5 * (d * d / c.var[i] + std::log(c.var[i]) + kLog2Pi);
    }
    logs[j] = lp;
    best = std::max(best, lp);
  }
  double sum = 0.0;
  for (double lp : logs) sum += std::exp(lp - best);
  return best + std::log(sum);
}

std::vector<double> GaussianMixture::score_at(std::span<const double> x) const {
  // Responsibility-weighted component scores, computed in the log domain.
  std::vector<double> logs(components.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < components.size(); ++j) {
    const auto& c = components[j];
    double lp = std::log(c.weight);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c.mean[i];
      lp += -0.5 * (d * d / c.var[i] + std::log(c.var[i]) + kLog2Pi);
    }
    logs[j] = lp;
    best = std::max(best, lp);
  }
  double norm = 0.0;
  for (auto& lp : logs) {
    lp = std::exp(lp - best);
    norm += lp;
  }
  std::vector<double> s(x.size(), 0.0);
  for (std::size_t j = 0; j < components.size(); ++j) {
    const auto& c = components[j];
    const double resp = logs[j] / norm;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s[i] += resp * (-(x[i] - c.mean[i]) / c.var[i]);
    }
  }
  return s;
}

GaussianMixture GaussianMixture::propagate(double alpha_bar, double gamma_bar) const {
  GaussianMixture out = *this;
  for (auto& c : out.components) {
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      c.mean[i] *= alpha_bar;
      c.var[i] = alpha_bar * alpha_bar * c.var[i] + gamma_bar;
    }
  }
  return out;
}

nlohmann::json mixture_to_json(const GaussianMixture& mix) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json means = nlohmann::json::array();
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& c : mix.components) {
    weights.push_back(c.weight);
    means.push_back(c.mean);
    vars.push_back(c.var);
  }
  return nlohmann::json{{"weights", weights}, {"means", means}, {"vars", vars}};
}

GaussianMixture mixture_from_json(const nlohmann::json& j) {
  try {
    const auto weights = j.at("weights").get<std::vector<double>>();
    const auto means = j.at("means").get<std::vector<std::vector<double>>>();
    const auto vars = j.at("vars").get<std::vector<std::vector<double>>>();
    if (weights.size() != means.size() || weights.size() != vars.size()) {
      throw ConfigError("mixture_from_json: ragged component lists");
    }
    GaussianMixture mix;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      mix.components.push_back(MixtureComponent{weights[i], means[i], vars[i]});
    }
    mix.validate();
    return mix;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mixture_from_json: ") + e.what());
  }
}

std::vector<double> analytic_score(const GaussianMixture& mix, const process::MomentTable& table,
                                   std::span<const double> x, std::size_t k) {
  if (k >= table.alpha_bar.size()) throw ConfigError("analytic_score: k out of range");
  return mix.propagate(table.alpha_bar[k], table.gamma_bar[k]).score_at(x);
}

AnalyticMixtureScore::AnalyticMixtureScore(GaussianMixture mix, process::ScheduleSpec schedule)
    : mix_(std::move(mix)), schedule_(schedule) {
  mix_.validate();
}

std::vector<double> AnalyticMixtureScore::score(std::span<const double> x, double t) const {
  return mix_.propagate(schedule_.alpha_bar(t), schedule_.gamma_bar(t)).score_at(x);
}

MlpDenoiser::MlpDenoiser(std::size_t dim, std::size_t hidden) : dim_(dim), hidden_(hidden) {
  if (dim == 0 || hidden == 0) throw ConfigError("MlpDenoiser: dims must be positive");
  params_.assign(layout(dim, hidden).total, 0.0);
}

MlpDenoiser MlpDenoiser::random_init(std::size_t dim, std::size_t hidden, RngStream& rng) {
  MlpDenoiser m(dim, hidden);
  const Layout l = layout(dim, hidden);
  const auto fill = [&](std::size_t from, std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) m.params_[from + i] = scale * rng.normal();
  };
  fill(l.w1, l.b1 - l.w1, dim + 1);
  fill(l.w2, l.b2 - l.w2, hidden);
  fill(l.w3, l.b3 - l.w3, hidden);
  return m;
}

std::vector<double> MlpDenoiser::forward(std::span<const double> x, double t) const {
  if (x.size() != dim_) throw ConfigError("MlpDenoiser::forward: wrong input dimension");
  const Layout l = layout(dim_, hidden_);
  const std::size_t in = dim_ + 1;
  std::vector<double> h1(hidden_), h2(hidden_), out(dim_);
  for (std::size_t h = 0; h < hidden_; ++h) {
    double z = params_[l.b1 + h];
    const double* row = params_.data() + l.w1 + h * in;
    for (std::size_t i = 0; i < dim_; ++i) z += row[i] * x[i];
    z += row[dim_] * t;
    h1[h] = std::tanh(z);
  }
  for (std::size_t h = 0; h < hidden_; ++h) {
    double z = params_[l.b2 + h];
    const double* row = params_.data() + l.w2 + h * hidden_;
    for (std::size_t i = 0; i < hidden_; ++i) z += row[i] * h1[i];
    h2[h] = std::tanh(z);
  }
  for (std::size_t o = 0; o < dim_; ++o) {
    double z = params_[l.b3 + o];
    const double* row = params_.data() + l.w3 + o * hidden_;
    for (std::size_t i = 0; i < hidden_; ++i) z += row[i] * h2[i];
    out[o] = z;
  }
  return out;
}

nlohmann::json MlpDenoiser::to_json() const {
  return nlohmann::json{{"dim", dim_}, {"hidden", hidden_}, {"params", params_}};
}

MlpDenoiser MlpDenoiser::from_json(const nlohmann::json& j) {
  try {
    MlpDenoiser m(j.at("dim").get<std::size_t>(), j.at("hidden").get<std::size_t>());
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != m.params_.size()) {
      throw ConfigError("MlpDenoiser::from_json: parameter count mismatch");
    }
    m.params_ = std::move(params);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("MlpDenoiser::from_json: ") + e.what());
  }
}

std::vector<double> mlp_gradients(const MlpDenoiser& model, std::span<const TrainSample> batch,
                                  loss::Pairing pairing) {
  if (batch.empty()) throw ConfigError("mlp_gradients: empty batch");
  const std::size_t dim = model.dim_, hidden = model.hidden_;
  const Layout l = layout(dim, hidden);
  const std::size_t in = dim + 1;
  const auto& p = model.params_;

  std::vector<double> grad(l.total, 0.0);
  std::vector<double> a0(in), h1(hidden), h2(hidden), out(dim);
  std::vector<double> r(dim), gout(dim), gh2(hidden), gh1(hidden);

  for (const auto& sample : batch) {
    if (sample.x.size() != dim || sample.eps.size() != dim) {
      throw ConfigError("mlp_gradients: sample dimension mismatch");
    }
    std::copy(sample.x.begin(), sample.x.end(), a0.begin());
    a0[dim] = sample.t;

    for (std::size_t h = 0; h < hidden; ++h) {
      double z = p[l.b1 + h];
      const double* row = p.data() + l.w1 + h * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * a0[i];
      h1[h] = std::tanh(z);
    }
    for (std::size_t h = 0; h < hidden; ++h) {
      double z = p[l.b2 + h];
      const double* row = p.data() + l.w2 + h * hidden;
      for (std::size_t i = 0; i < hidden; ++i) z += row[i] * h1[i];
      h2[h] = std::tanh(z);
    }
    for (std::size_t o = 0; o < dim; ++o) {
      double z = p[l.b3 + o];
      const double* row = p.data() + l.w3 + o * hidden;
      for (std::size_t i = 0; i < hidden; ++i) z += row[i] * h2[i];
      out[o] = z;
    }

    for (std::size_t i = 0; i < dim; ++i) r[i] = sample.eps[i] - out[i];
    loss::loss_grad_r(pairing, r, sample.w, sample.v, gout);
    // dL/d out = -dL/dr.
    for (auto& gi : gout) gi = -gi;

    for (std::size_t o = 0; o < dim; ++o) {
      grad[l.b3 + o] += gout[o];
      double* grow = grad.data() + l.w3 + o * hidden;
      for (std::size_t i = 0; i < hidden; ++i) grow[i] += gout[o] * h2[i];
    }
    std::fill(gh2.begin(), gh2.end(), 0.0);
    for (std::size_t o = 0; o < dim; ++o) {
      const double* row = p.data() + l.w3 + o * hidden;
      for (std::size_t i = 0; i < hidden; ++i) gh2[i] += row[i] * gout[o];
    }
    for (std::size_t h = 0; h < hidden; ++h) gh2[h] *= 1.0 - h2[h] * h2[h];

    for (std::size_t h = 0; h < hidden; ++h) {
      grad[l.b2 + h] += gh2[h];
      double* grow = grad.data() + l.w2 + h * hidden;
      for (std::size_t i = 0; i < hidden; ++i) grow[i] += gh2[h] * h1[i];
    }
    std::fill(gh1.begin(), gh1.end(), 0.0);
    for (std::size_t h = 0; h < hidden; ++h) {
      const double* row = p.data() + l.w2 + h * hidden;
      for (std::size_t i = 0; i < hidden; ++i) gh1[i] += row[i] * gh2[h];
    }
    for (std::size_t h = 0; h < hidden; ++h) gh1[h] *= 1.0 - h1[h] * h1[h];

    for (std::size_t h = 0; h < hidden; ++h) {
      grad[l.b1 + h] += gh1[h];
      double* grow = grad.data() + l.w1 + h * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += gh1[h] * a0[i];
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& gi : grad) gi *= inv;
  return grad;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  try {
    if (j.contains("pairing")) cfg.pairing = loss::pairing_from_name(j.at("pairing").get<std::string>());
    if (j.contains("steps")) cfg.steps = j.at("steps").get<std::size_t>();
    if (j.contains("batch")) cfg.batch_size = j.at("batch").get<std::size_t>();
    if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::size_t>();
    if (j.contains("lr")) cfg.learning_rate = j.at("lr").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("forward_sampling")) {
      const auto mode = j.at("forward_sampling").get<std::string>();
      if (mode == "exact") {
        cfg.exact_forward = true;
      } else if (mode == "gaussian") {
        cfg.exact_forward = false;
      } else {
        throw ConfigError("train config: forward_sampling must be exact|gaussian");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (cfg.steps == 0 || cfg.batch_size == 0 || cfg.hidden == 0 || !(cfg.learning_rate >= 0.0)) {
    throw ConfigError("train config: hyperparameters must be positive");
  }
  return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{
      {"pairing", loss::pairing_name(cfg.pairing)},
      {"steps", cfg.steps},
      {"batch", cfg.batch_size},
      {"hidden", cfg.hidden},
      {"lr", cfg.learning_rate},
      {"seed", cfg.seed},
      {"forward_sampling", cfg.exact_forward ? "exact" : "gaussian"},
  };
}

TrainResult train(const GaussianMixture& data, const process::ProcessSpec& spec,
                  const TrainConfig& cfg) {
  data.validate();
  const std::size_t dim = data.dim();
  const std::size_t steps = spec.grid.step_count();
  const auto table = process::moments(spec);
  const auto weights = loss::step_weights(spec, table);
  const increments::IncrementKind forward_kind = loss::q_kind(cfg.pairing);

  RngStream root(cfg.seed);
  RngStream init_rng = root.child(0);
  TrainResult result{MlpDenoiser::random_init(dim, cfg.hidden, init_rng), {}};
  result.loss_trace.reserve(cfg.steps);

  std::vector<TrainSample> batch(cfg.batch_size);
  std::vector<double> x(dim), r(dim);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    RngStream step_rng = root.child(1 + step);
    for (auto& sample : batch) {
      const auto x0 = data.sample(step_rng);
      const std::size_t k =
          1 + std::min<std::size_t>(static_cast<std::size_t>(step_rng.uniform01() * double(steps)),
                                    steps - 1);
      x.assign(x0.begin(), x0.end());
      if (cfg.exact_forward) {
        for (std::size_t j = 0; j < k; ++j) {
          const double t = spec.grid.times[j];
          const double dt = spec.grid.delta(j);
          const double beta = spec.schedule.beta(t);
          const double noise = spec.schedule.g(t) * std::sqrt(dt);
          for (auto& xi : x) xi += beta * xi * dt + noise * increments::sample_z(forward_kind, step_rng);
        }
      } else {
        for (std::size_t i = 0; i < dim; ++i) {
          x[i] = table.alpha_bar[k] * x0[i] + table.sigma(k) * step_rng.normal();
        }
      }
      sample.x = x;
      sample.t = spec.grid.times[k];
      sample.w = weights.w[k];
      sample.v = weights.v[k];
      sample.eps.resize(dim);
      const double sigma_k = table.sigma(k);
      for (std::size_t i = 0; i < dim; ++i) {
        sample.eps[i] = -(x[i] - table.alpha_bar[k] * x0[i]) / sigma_k;
      }
    }

    double batch_loss = 0.0;
    for (const auto& sample : batch) {
      const auto out = result.model.forward(sample.x, sample.t);
      for (std::size_t i = 0; i < dim; ++i) r[i] = sample.eps[i] - out[i];
      batch_loss += loss::loss_eval(cfg.pairing, r, sample.w, sample.v);
    }
    batch_loss /= static_cast<double>(cfg.batch_size);
    result.loss_trace.push_back(batch_loss);
    if (!(batch_loss < cfg.divergence_guard)) {
      throw NumericError("train: loss " + std::to_string(batch_loss) + " exceeded the divergence guard at step " +
                         std::to_string(step));
    }

    const auto grad = mlp_gradients(result.model, batch, cfg.pairing);
    auto params = result.model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= cfg.learning_rate * grad[i];
    }
  }
  return result;
}

MlpScore::MlpScore(MlpDenoiser model, process::ScheduleSpec schedule, double sigma_floor)
    : model_(std::move(model)), schedule_(schedule), sigma_floor_(sigma_floor) {}

std::vector<double> MlpScore::score(std::span<const double> x, double t) const {
  const double sigma = std::max(std::sqrt(schedule_.gamma_bar(t)), sigma_floor_);
  return loss::score_from_eps(model_.forward(x, t), sigma);
}

}  // namespace walkdiff::score
