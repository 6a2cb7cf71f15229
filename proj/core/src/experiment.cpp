#include "walkdiff/experiment.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <string>

#include "walkdiff/csv.hpp"
#include "walkdiff/divergence.hpp"
#include "walkdiff/errors.hpp"
#include "walkdiff/loss.hpp"
#include "walkdiff/sampler.hpp"
#include "walkdiff/walk.hpp"

namespace walkdiff::experiment {

namespace {

namespace fs = std::filesystem;

nlohmann::json default_data_json() {
  return nlohmann::json{
      {"weights", {0.5, 0.5}},
      {"means", {{-1.0, -1.0}, {1.0, 1.0}}},
      {"vars", {{0.25, 0.25}, {0.25, 0.25}}},
  };
}

std::vector<increments::IncrementKind> kinds_from_json(const nlohmann::json& j) {
  std::vector<increments::IncrementKind> kinds;
  for (const auto& name : j) {
    kinds.push_back(increments::kind_from_name(name.get<std::string>()));
  }
  return kinds;
}

/// Artifact recorder: owns the output directory and the manifest.
class Run {
 public:
  Run(std::string subcommand, const ExperimentConfig& cfg, fs::path dir)
      : subcommand_(std::move(subcommand)), cfg_(cfg), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    outputs_.push_back(name);
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + (dir_ / name).string());
    return out;
  }

  void write_json(const std::string& name, const nlohmann::json& j) {
    auto out = open(name);
    out << j.dump(2) << '\n';
  }

  void finish() {
    nlohmann::json manifest{
        {"subcommand", subcommand_},
        {"version", kVersion},
        {"seed", cfg_.seed},
        {"config_hash", config_hash_hex(cfg_.raw)},
        {"config", cfg_.raw},
        {"outputs", outputs_},
    };
    auto out = open("manifest.json");
    out << manifest.dump(2) << '\n';
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string subcommand_;
  const ExperimentConfig& cfg_;
  fs::path dir_;
  std::vector<std::string> outputs_;
};

int run_moments(const ExperimentConfig& cfg, Run& run) {
  const auto table = process::moments(cfg.process);
  auto csv_out = run.open("moments.csv");
  csv::Writer w(csv_out);
  w.begin_row();
  w.field("k");
  w.field("t");
  w.field("alpha_bar");
  w.field("gamma_bar");
  w.field("sigma");
  w.end_row();
  for (std::size_t k = 0; k <= table.step_count(); ++k) {
    w.begin_row();
    w.field(k);
    w.field(cfg.process.grid.times[k]);
    w.field(table.alpha_bar[k]);
    w.field(table.gamma_bar[k]);
    w.field(table.sigma(k));
    w.end_row();
  }

  // Recovery checks for the two literature chains.
  std::vector<double> ddpm_betas(1000);
  for (std::size_t i = 0; i < ddpm_betas.size(); ++i) {
    ddpm_betas[i] = 1e-4 + (0.02 - 1e-4) * double(i) / double(ddpm_betas.size() - 1);
  }
  const double ddpm_gap = process::ddpm_identity_gap(process::ddpm_moments(ddpm_betas));

  const auto vdm_grid = process::build_grid(std::size_t{16});
  const auto gamma_fn = [](double t) { return -5.0 + 10.0 * t; };
  const auto vdm_table = process::vdm_moments(gamma_fn, vdm_grid);
  double vdm_err = 0.0;
  for (std::size_t k = 1; k <= vdm_grid.step_count(); ++k) {
    const double gm = gamma_fn(vdm_grid.times[k]);
    const double alpha = std::sqrt(1.0 / (1.0 + std::exp(gm)));
    const double var = 1.0 / (1.0 + std::exp(-gm));
    vdm_err = std::max(vdm_err, std::abs(vdm_table.alpha_bar[k] - alpha));
    vdm_err = std::max(vdm_err, std::abs(vdm_table.gamma_bar[k] - var));
  }

  run.write_json("recovery.json", nlohmann::json{
                                      {"ddpm_identity_gap", ddpm_gap},
                                      {"vdm_sigmoid_max_err", vdm_err},
                                  });
  return ddpm_gap < 1e-10 && vdm_err < 1e-9 ? kExitOk : kExitNumeric;
}

int run_kl_table(const ExperimentConfig& cfg, Run& run) {
  auto csv_out = run.open("kl_table.csv");
  csv::Writer w(csv_out);
  w.begin_row();
  w.field("pairing");
  w.field("mu1");
  w.field("mu2");
  w.field("sigma");
  w.field("closed_form");
  w.field("quadrature");
  w.field("abs_err");
  w.end_row();

  double worst = 0.0;
  const auto emit = [&](std::string_view pairing, double mu1, double mu2, double sigma,
                        double closed, double quad) {
    const double err = std::abs(closed - quad);
    worst = std::max(worst, err);
    w.begin_row();
    w.field(pairing);
    w.field(mu1);
    w.field(mu2);
    w.field(sigma);
    w.field(closed);
    w.field(quad);
    w.field(err);
    w.end_row();
  };

  using namespace divergence;
  for (double sigma : cfg.kl_sigmas) {
    for (double dmu : cfg.kl_mu_deltas) {
      emit("gauss-gauss", dmu, 0.0, sigma, kl_gauss_gauss(dmu, 0.0, sigma),
           kl_quadrature(gaussian_dist(dmu, sigma), gaussian_dist(0.0, sigma)));
      const double b = sigma / std::sqrt(2.0);
      emit("laplace-laplace", dmu, 0.0, sigma, kl_laplace_laplace(dmu, b, 0.0, b),
           kl_quadrature(laplace_dist(dmu, b), laplace_dist(0.0, b)));
      emit("unif-gauss", dmu, 0.0, sigma, kl_unif_gauss(dmu, 0.0, sigma),
           kl_quadrature(uniform_from_sigma(dmu, sigma), gaussian_dist(0.0, sigma)));
      const double b1 = std::sqrt(3.0) * sigma;
      emit("unif-laplace", dmu, 0.0, sigma, kl_unif_laplace(dmu, b1, 0.0, b),
           kl_quadrature(uniform_dist(dmu, b1), laplace_dist(0.0, b)));
    }
  }
  run.write_json("kl_report.json", nlohmann::json{{"max_abs_err", worst}});
  return worst < 1e-6 ? kExitOk : kExitNumeric;
}

int run_simulate(const ExperimentConfig& cfg, Run& run) {
  const auto table = process::moments(cfg.process);
  const std::size_t dim = cfg.simulate_x0.size();
  RngStream rng(cfg.seed);

  auto csv_out = run.open("moment_check.csv");
  csv::Writer w(csv_out);
  w.begin_row();
  w.field("kind");
  w.field("k");
  w.field("t");
  w.field("coord");
  w.field("z_mean");
  w.field("z_var");
  w.field("pass");
  w.end_row();

  bool all_pass = true;
  const increments::IncrementKind kinds[] = {increments::IncrementKind::gaussian,
                                             increments::IncrementKind::laplace,
                                             increments::IncrementKind::uniform};
  for (std::size_t ki = 0; ki < 3; ++ki) {
    RngStream kind_rng = rng.child(ki);
    const auto ens = walk::ensemble(cfg.process, kinds[ki], walk::fixed_x0(cfg.simulate_x0),
                                    cfg.simulate_paths, kind_rng);
    for (std::size_t k = 0; k <= table.step_count(); ++k) {
      std::vector<double> expected_mean(dim);
      for (std::size_t c = 0; c < dim; ++c) expected_mean[c] = table.alpha_bar[k] * cfg.simulate_x0[c];
      const auto check =
          analysis::moment_check(ens.slice(k), dim, expected_mean, table.gamma_bar[k]);
      all_pass = all_pass && check.pass;
      for (std::size_t c = 0; c < dim; ++c) {
        w.begin_row();
        w.field(increments::kind_name(kinds[ki]));
        w.field(k);
        w.field(cfg.process.grid.times[k]);
        w.field(c);
        w.field(check.z_mean[c]);
        w.field(check.z_var[c]);
        w.field(check.pass ? "true" : "false");
        w.end_row();
      }
    }
    if (ki == 0) {
      // Path dump for the first kind, capped to keep files small.
      RngStream dump_rng = rng.child(100);
      const auto small = walk::ensemble(cfg.process, kinds[ki], walk::fixed_x0(cfg.simulate_x0),
                                        std::min(cfg.paths_csv_limit, cfg.simulate_paths), dump_rng);
      auto paths_out = run.open("paths.csv");
      walk::write_paths_csv(small, paths_out);
      run.write_json("paths_meta.json", walk::ensemble_metadata(small));
    }
  }
  run.write_json("simulate_report.json", nlohmann::json{{"all_pass", all_pass}});
  return all_pass ? kExitOk : kExitStatistical;
}

int run_verify_invariance(const ExperimentConfig& cfg, Run& run) {
  RngStream rng(cfg.seed);
  nlohmann::json verdicts = nlohmann::json::object();
  bool all_pass = true;
  const double ks_crit_1pct =
      std::sqrt(-0.5 * std::log(0.005)) *
      std::sqrt(2.0 / static_cast<double>(cfg.sweep_paths));

  for (std::size_t ki = 0; ki < cfg.sweep_kinds.size(); ++ki) {
    const auto kind = cfg.sweep_kinds[ki];
    RngStream kind_rng = rng.child(ki);
    const auto table = analysis::convergence_sweep(kind, cfg.sweep_t_list, cfg.process.schedule,
                                                   cfg.sweep_metric, cfg.sweep_replicates,
                                                   cfg.sweep_paths, cfg.simulate_x0, kind_rng);
    auto csv_out = run.open(std::string("sweep_") + std::string(increments::kind_name(kind)) + ".csv");
    analysis::write_sweep_csv(table, csv_out);

    const auto medians = table.medians(cfg.sweep_t_list);
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
      decreasing = decreasing && medians[i] > medians[i + 1];
    }
    const bool below = medians.back() < ks_crit_1pct;
    const double slope = analysis::sweep_loglog_slope(cfg.sweep_t_list, medians);
    all_pass = all_pass && decreasing && below;
    verdicts[std::string(increments::kind_name(kind))] = {
        {"medians", medians},
        {"strictly_decreasing", decreasing},
        {"final_below_critical_1pct", below},
        {"critical_1pct", ks_crit_1pct},
        {"loglog_slope", slope},
    };
  }
  verdicts["all_pass"] = all_pass;
  run.write_json("verdict.json", verdicts);
  return all_pass ? kExitOk : kExitStatistical;
}

int run_train(const ExperimentConfig& cfg, Run& run) {
  score::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const auto result = score::train(cfg.data, cfg.process, tc);

  {
    auto trace_out = run.open("loss_trace.csv");
    csv::Writer w(trace_out);
    w.begin_row();
    w.field("step");
    w.field("loss");
    w.end_row();
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
      w.begin_row();
      w.field(i);
      w.field(result.loss_trace[i]);
      w.end_row();
    }
  }
  run.write_json("checkpoint.json", result.model.to_json());

  // Held-out epsilon-prediction error, model vs analytic score.
  const auto table = process::moments(cfg.process);
  const std::size_t steps = cfg.process.grid.step_count();
  const std::size_t dim = cfg.data.dim();
  const auto q = loss::q_kind(tc.pairing);
  RngStream eval_rng = RngStream(cfg.seed).child(0xe7a1);
  const std::size_t eval_n = 2048;
  double mse_model = 0.0, mse_analytic = 0.0;
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < eval_n; ++i) {
    const auto x0 = cfg.data.sample(eval_rng);
    const std::size_t k =
        1 + std::min<std::size_t>(static_cast<std::size_t>(eval_rng.uniform01() * double(steps)),
                                  steps - 1);
    x.assign(x0.begin(), x0.end());
    for (std::size_t j = 0; j < k; ++j) {
      const double t = cfg.process.grid.times[j];
      const double dt = cfg.process.grid.delta(j);
      const double beta = cfg.process.schedule.beta(t);
      const double noise = cfg.process.schedule.g(t) * std::sqrt(dt);
      for (auto& xi : x) xi += beta * xi * dt + noise * increments::sample_z(q, eval_rng);
    }
    const double sigma_k = table.sigma(k);
    const auto pred = result.model.forward(x, cfg.process.grid.times[k]);
    const auto s_ref = score::analytic_score(cfg.data, table, x, k);
    for (std::size_t c = 0; c < dim; ++c) {
      const double eps = -(x[c] - table.alpha_bar[k] * x0[c]) / sigma_k;
      const double dm = eps - pred[c];
      const double da = eps - sigma_k * s_ref[c];
      mse_model += dm * dm;
      mse_analytic += da * da;
    }
  }
  mse_model /= double(eval_n * dim);
  mse_analytic /= double(eval_n * dim);

  const std::size_t window = std::max<std::size_t>(1, result.loss_trace.size() / 10);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < window; ++i) first += result.loss_trace[i];
  for (std::size_t i = result.loss_trace.size() - window; i < result.loss_trace.size(); ++i) {
    last += result.loss_trace[i];
  }
  run.write_json("train_report.json",
                 nlohmann::json{
                     {"first_window_mean", first / double(window)},
                     {"final_window_mean", last / double(window)},
                     {"model_eps_mse", mse_model},
                     {"analytic_eps_mse", mse_analytic},
                     {"mse_ratio", mse_model / mse_analytic},
                 });
  return kExitOk;
}

std::unique_ptr<score::ScoreModel> make_score_model(const ExperimentConfig& cfg) {
  if (cfg.sample_score == "analytic") {
    return std::make_unique<score::AnalyticMixtureScore>(cfg.data, cfg.process.schedule);
  }
  const std::string prefix = "checkpoint:";
  if (cfg.sample_score.rfind(prefix, 0) == 0) {
    const fs::path path = cfg.sample_score.substr(prefix.size());
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
    nlohmann::json j;
    in >> j;
    return std::make_unique<score::MlpScore>(score::MlpDenoiser::from_json(j),
                                             cfg.process.schedule);
  }
  throw ConfigError("sample.score must be 'analytic' or 'checkpoint:<path>'");
}

int run_sample(const ExperimentConfig& cfg, Run& run) {
  const auto model = make_score_model(cfg);
  const sampler::ReverseSpec rspec{cfg.process, model.get(), cfg.p_kind};
  RngStream rng(cfg.seed);
  RngStream chain_rng = rng.child(1);
  const auto samples = sampler::sample(rspec, cfg.sample_paths, chain_rng);
  const std::size_t dim = model->dim();

  {
    auto csv_out = run.open("samples.csv");
    csv::Writer w(csv_out);
    w.begin_row();
    for (std::size_t c = 0; c < dim; ++c) w.field("x_" + std::to_string(c));
    w.end_row();
    for (std::size_t i = 0; i < cfg.sample_paths; ++i) {
      w.begin_row();
      for (std::size_t c = 0; c < dim; ++c) w.field(samples[i * dim + c]);
      w.end_row();
    }
  }

  // Two-sample energy test against fresh draws from the data mixture.
  RngStream data_rng = rng.child(2);
  std::vector<double> reference(cfg.sample_paths * dim);
  for (std::size_t i = 0; i < cfg.sample_paths; ++i) {
    const auto x = cfg.data.sample(data_rng);
    std::copy(x.begin(), x.end(), reference.begin() + i * dim);
  }
  RngStream test_rng = rng.child(3);
  analysis::EnergyOptions opt;
  opt.threads = cfg.threads;
  const auto test = analysis::energy_distance(samples, reference, dim, test_rng, opt);
  run.write_json("sample_report.json", analysis::two_sample_to_json(test));
  return test.reject_1pct ? kExitStatistical : kExitOk;
}

int run_elbo(const ExperimentConfig& cfg, Run& run) {
  const auto table = process::moments(cfg.process);
  const score::AnalyticMixtureScore model(cfg.data, cfg.process.schedule);
  RngStream rng(cfg.seed);
  RngStream data_rng = rng.child(1);
  const std::size_t dim = cfg.data.dim();
  std::vector<double> batch(cfg.elbo_points * dim);
  for (std::size_t i = 0; i < cfg.elbo_points; ++i) {
    const auto x = cfg.data.sample(data_rng);
    std::copy(x.begin(), x.end(), batch.begin() + i * dim);
  }
  RngStream elbo_rng = rng.child(2);
  loss::ElboOptions opt;
  opt.recon_sigma = cfg.elbo_recon_sigma;
  opt.replicates = cfg.elbo_replicates;
  const auto report = loss::elbo(batch, dim, model, cfg.process, table, cfg.q_kind, cfg.p_kind,
                                 elbo_rng, opt);
  run.write_json("elbo.json", loss::elbo_to_json(report));
  return kExitOk;
}

int run_likelihood(const ExperimentConfig& cfg, Run& run) {
  const score::AnalyticMixtureScore model(cfg.data, cfg.process.schedule);
  RngStream rng(cfg.seed);
  RngStream data_rng = rng.child(1);
  const std::size_t dim = cfg.data.dim();
  std::vector<double> batch(cfg.likelihood_points * dim);
  for (std::size_t i = 0; i < cfg.likelihood_points; ++i) {
    const auto x = cfg.data.sample(data_rng);
    std::copy(x.begin(), x.end(), batch.begin() + i * dim);
  }
  const auto summary = sampler::log_likelihood_batch(batch, dim, cfg.process, model);

  double gap = 0.0;
  for (std::size_t i = 0; i < cfg.likelihood_points; ++i) {
    const double truth = cfg.data.log_density({batch.data() + i * dim, dim});
    gap += std::abs(summary.per_point[i] - truth);
  }
  gap /= double(cfg.likelihood_points);

  run.write_json("likelihood.json", nlohmann::json{
                                        {"per_point", summary.per_point},
                                        {"mean", summary.mean},
                                        {"stderr", summary.stderr_mean},
                                        {"mean_abs_gap_vs_analytic", gap},
                                        {"method", "exact-jacobian-fd"},
                                    });
  return kExitOk;
}

}  // namespace

nlohmann::json default_config_json() {
  return nlohmann::json{
      {"seed", 20250601},
      {"threads", 1},
      {"process",
       {{"kind", "vdm"}, {"params", {{"gamma0", -6.0}, {"gamma1", 6.0}}}, {"T", 64}, {"spacing", "uniform"}}},
      {"q_kind", "gaussian"},
      {"p_kind", "gaussian"},
      {"data", default_data_json()},
      {"simulate", {{"paths", 100000}, {"x0", {1.0}}, {"paths_csv_limit", 100}}},
      {"sweep",
       {{"kinds", {"laplace", "uniform"}},
        {"T_list", {8, 32, 128, 512}},
        {"replicates", 10},
        {"paths", 100000},
        {"metric", "ks"}}},
      {"train",
       {{"pairing", "gauss-gauss"},
        {"steps", 20000},
        {"batch", 32},
        {"hidden", 64},
        {"lr", 0.02},
        {"forward_sampling", "exact"}}},
      {"sample", {{"paths", 50000}, {"score", "analytic"}}},
      {"elbo", {{"points", 100}, {"replicates", 4}, {"recon_sigma", 0.0}}},
      {"likelihood", {{"points", 100}}},
      {"kl_table", {{"sigmas", {0.5, 1.0, 2.0}}, {"mu_deltas", {0.0, 0.5, 1.0, 2.0}}}},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = std::max<std::size_t>(1, j.at("threads").get<std::size_t>());
    cfg.process = process::process_from_json(
        j.contains("process") ? j.at("process") : default_config_json().at("process"));
    if (j.contains("q_kind")) cfg.q_kind = increments::kind_from_name(j.at("q_kind").get<std::string>());
    if (j.contains("p_kind")) cfg.p_kind = increments::kind_from_name(j.at("p_kind").get<std::string>());
    cfg.data = score::mixture_from_json(j.contains("data") ? j.at("data") : default_data_json());
    cfg.train = score::train_config_from_json(j.contains("train") ? j.at("train")
                                                                  : nlohmann::json::object());
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      if (s.contains("paths")) cfg.simulate_paths = s.at("paths").get<std::size_t>();
      if (s.contains("x0")) cfg.simulate_x0 = s.at("x0").get<std::vector<double>>();
      if (s.contains("paths_csv_limit")) cfg.paths_csv_limit = s.at("paths_csv_limit").get<std::size_t>();
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      if (s.contains("kinds")) cfg.sweep_kinds = kinds_from_json(s.at("kinds"));
      if (s.contains("T_list")) cfg.sweep_t_list = s.at("T_list").get<std::vector<std::size_t>>();
      if (s.contains("replicates")) cfg.sweep_replicates = s.at("replicates").get<std::size_t>();
      if (s.contains("paths")) cfg.sweep_paths = s.at("paths").get<std::size_t>();
      if (s.contains("metric")) {
        cfg.sweep_metric = analysis::sweep_metric_from_name(s.at("metric").get<std::string>());
      }
    }
    if (cfg.sweep_kinds.empty()) {
      cfg.sweep_kinds = {increments::IncrementKind::laplace, increments::IncrementKind::uniform};
    }
    if (j.contains("sample")) {
      const auto& s = j.at("sample");
      if (s.contains("paths")) cfg.sample_paths = s.at("paths").get<std::size_t>();
      if (s.contains("score")) cfg.sample_score = s.at("score").get<std::string>();
    }
    if (j.contains("elbo")) {
      const auto& s = j.at("elbo");
      if (s.contains("points")) cfg.elbo_points = s.at("points").get<std::size_t>();
      if (s.contains("replicates")) cfg.elbo_replicates = s.at("replicates").get<std::size_t>();
      if (s.contains("recon_sigma")) cfg.elbo_recon_sigma = s.at("recon_sigma").get<double>();
    }
    if (j.contains("likelihood")) {
      const auto& s = j.at("likelihood");
      if (s.contains("points")) cfg.likelihood_points = s.at("points").get<std::size_t>();
    }
    if (j.contains("kl_table")) {
      const auto& s = j.at("kl_table");
      if (s.contains("sigmas")) cfg.kl_sigmas = s.at("sigmas").get<std::vector<double>>();
      if (s.contains("mu_deltas")) cfg.kl_mu_deltas = s.at("mu_deltas").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (cfg.simulate_paths == 0 || cfg.sweep_paths == 0 || cfg.sample_paths == 0 ||
      cfg.elbo_points == 0 || cfg.likelihood_points == 0 || cfg.sweep_replicates == 0) {
    throw ConfigError("config: counts must be positive");
  }
  if (cfg.simulate_x0.empty()) throw ConfigError("config: simulate.x0 must be non-empty");
  for (double sigma : cfg.kl_sigmas) {
    if (!(sigma > 0.0)) throw ConfigError("config: kl_table.sigmas must be positive");
  }
  return cfg;
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like dotted.path=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  nlohmann::json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override has an empty path segment: " + assignment);
    if (dot == std::string::npos) {
      nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string config_hash_hex(const nlohmann::json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run(const std::string& subcommand, const ExperimentConfig& cfg,
        const std::filesystem::path& out_dir) {
  Run run(subcommand, cfg, out_dir);
  int code;
  if (subcommand == "moments") {
    code = run_moments(cfg, run);
  } else if (subcommand == "kl-table") {
    code = run_kl_table(cfg, run);
  } else if (subcommand == "simulate") {
    code = run_simulate(cfg, run);
  } else if (subcommand == "verify-invariance") {
    code = run_verify_invariance(cfg, run);
  } else if (subcommand == "train") {
    code = run_train(cfg, run);
  } else if (subcommand == "sample") {
    code = run_sample(cfg, run);
  } else if (subcommand == "elbo") {
    code = run_elbo(cfg, run);
  } else if (subcommand == "likelihood") {
    code = run_likelihood(cfg, run);
  } else {
    throw ConfigError("unknown subcommand: " + subcommand);
  }
  run.finish();
  return code;
}

}  // namespace walkdiff::experiment
