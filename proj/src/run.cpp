#include "dglm/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "dglm/errors.hpp"
#include "dglm/filters.hpp"
#include "dglm/io.hpp"
#include "dglm/kalman.hpp"
#include "dglm/learning.hpp"
#include "dglm/stats.hpp"

namespace dglm {

Eigen::MatrixXd RunReport::filtered_means() const {
  Eigen::MatrixXd out(state_dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) out.col(static_cast<Eigen::Index>(t)) = rows[t].mean;
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::string> parameter_names(const ModelSpec& spec) {
  std::vector<std::string> names;
  for (int j = 1; j <= spec.state_dim(); ++j) names.push_back("W_" + std::to_string(j));
  if (spec.has_observation_variance()) names.push_back("V");
  return names;
}

// Rows are W_1..W_m[, V]; columns are particles.
Eigen::MatrixXd parameter_matrix(const ParticleParams& p) {
  Eigen::MatrixXd out(p.w.rows() + (p.has_v() ? 1 : 0), p.w.cols());
  out.topRows(p.w.rows()) = p.w;
  if (p.has_v()) out.row(p.w.rows()) = p.v.transpose();
  return out;
}

Eigen::VectorXd known_parameter_vector(const ParameterSet& p) {
  Eigen::VectorXd out(p.W.rows() + (p.V ? 1 : 0));
  out.head(p.W.rows()) = p.W.diagonal();
  if (p.V) out[p.W.rows()] = *p.V;
  return out;
}

void summarize_cloud(const Eigen::MatrixXd& cloud, const Eigen::VectorXd& w, Eigen::VectorXd& mean,
                     Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  const Eigen::Index d = cloud.rows();
  mean = cloud * w;
  lo.resize(d);
  hi.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd row = cloud.row(j).transpose();
    lo[j] = weighted_quantile(row, w, 0.025);
    hi[j] = weighted_quantile(row, w, 0.975);
  }
}

void assimilate(ParticleSystem& ps, const RunConfig& cfg, const ModelSpec& spec,
                std::optional<double> y, Rng& rng) {
  const auto& fc = cfg.filter_config;
  if (!y) {
    if (is_learning(cfg.filter))
      propagate_only_step(ps, spec, rng);
    else
      propagate_only_step(ps, spec, *cfg.params, rng);
    return;
  }
  switch (cfg.filter) {
    case FilterType::Sis: sis_step(ps, spec, *cfg.params, *y, fc, rng); break;
    case FilterType::Sir: sir_step(ps, spec, *cfg.params, *y, fc, rng); break;
    case FilterType::Apf: apf_step(ps, spec, *cfg.params, *y, fc, rng); break;
    case FilterType::Lw: lw_step(ps, spec, cfg.lw, *y, fc, rng); break;
    case FilterType::Storvik: storvik_step(ps, spec, cfg.prior, *y, fc, rng); break;
    case FilterType::Pl: pl_step(ps, spec, cfg.prior, *y, fc, rng); break;
  }
}

nlohmann::json base_meta(const RunConfig& cfg, const std::string& command) {
  nlohmann::json meta;
  meta["format"] = std::string(kConfigFormat);
  meta["version"] = DGLM_VERSION;
  meta["command"] = command;
  meta["seed"] = *cfg.seed;
  meta["config"] = cfg.entries;
  return meta;
}

nlohmann::json pmmh_meta(const PmmhConfig& p, const PmmhTrace& trace, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["iterations"] = p.n_iter;
  j["burn_in"] = p.burn_in;
  j["thin"] = p.thin;
  j["particles"] = p.n_particles;
  j["likelihood"] = to_string(p.likelihood);
  if (p.step_covariance.size() > 0) {
    std::vector<double> diag(p.step_covariance.diagonal().data(),
                             p.step_covariance.diagonal().data() + p.step_covariance.rows());
    j["step_variance"] = diag;
  } else {
    j["step_variance"] = PmmhConfig::kDefaultStep * PmmhConfig::kDefaultStep;
  }
  j["acceptance_rate"] = trace.acceptance_rate();
  const auto draws = trace.posterior_draws();
  j["posterior_draws"] = draws.size();
  if (!draws.empty()) {
    const auto n = static_cast<Eigen::Index>(draws.size());
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    nlohmann::json post;
    for (std::size_t k = 0; k < names.size(); ++k) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& d = draws[static_cast<std::size_t>(i)];
        v[i] = static_cast<Eigen::Index>(k) < d.W.rows() ? d.W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))
                                                        : d.V.value_or(0.0);
      }
      post[names[k]] = {{"mean", weighted_mean(v, w)},
                        {"lo", weighted_quantile(v, w, 0.025)},
                        {"hi", weighted_quantile(v, w, 0.975)}};
    }
    j["posterior"] = post;
  }
  return j;
}

}  // namespace

RunReport run_filter(const RunConfig& cfg, const TimeSeries& series) {
  cfg.validate();
  const ModelSpec spec = cfg.model_spec();
  series.validate_for(spec);
  const bool learning = is_learning(cfg.filter);

  Rng rng(*cfg.seed);
  // Separate streams so one-step forecasts and the reference chain leave
  // the filter's own draws unchanged.
  Rng forecast_rng = rng.substream(1);
  Rng reference_rng = rng.substream(2);

  RunReport report;
  report.filter = to_string(cfg.filter);
  report.seed = *cfg.seed;
  report.state_dim = spec.state_dim();
  report.param_names = parameter_names(spec);

  ParticleSystem ps = learning ? init_learning_particles(cfg.prior, spec, cfg.filter_config, rng)
                               : init_particles(cfg.prior, spec, cfg.filter_config, rng);
  const std::optional<ParameterSet> fixed = learning ? std::nullopt : cfg.params;

  std::vector<std::optional<double>> predicted;
  for (const auto& obs : series) {
    StepRecord rec;
    rec.t = obs.t;
    rec.y = obs.y;
    if (cfg.one_step) {
      ForecastBand band = forecast_states(ps, spec, fixed, 1, forecast_rng);
      forecast_observations(band, spec, forecast_rng);
      rec.one_step = weighted_mean(band.observations[0], band.weights);
    }
    predicted.push_back(rec.one_step);

    const auto start = Clock::now();
    assimilate(ps, cfg, spec, obs.y, rng);
    const auto stop = Clock::now();
    rec.time_ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;

    const Eigen::VectorXd w = ps.weights.weights();
    rec.ess = ps.ess_trace.back();
    summarize_cloud(ps.states, w, rec.mean, rec.lo, rec.hi);
    if (ps.params) {
      summarize_cloud(parameter_matrix(*ps.params), w, rec.param_mean, rec.param_lo, rec.param_hi);
    } else {
      rec.param_mean = known_parameter_vector(*cfg.params);
      rec.param_lo = rec.param_hi = rec.param_mean;
    }
    report.total_ms += rec.time_ms;
    report.rows.push_back(std::move(rec));
  }
  report.collapse_resets = ps.collapse_resets;
  if (!report.rows.empty()) report.mean_iteration_ms = report.total_ms / static_cast<double>(report.rows.size());

  if (ps.params) {
    const Eigen::MatrixXd logp = parameter_matrix(*ps.params).array().log().matrix();
    const Eigen::VectorXd w = ps.weights.weights();
    for (Eigen::Index k = 0; k < logp.rows(); ++k) {
      const double v = weighted_variance(logp.row(k).transpose(), w);
      report.final_log_param_variance.push_back(v);
      if (!(v >= kCollapseVariance)) report.collapse_warning = true;
    }
  }

  if (cfg.forecast_k > 0) {
    ForecastBand band = forecast_states(ps, spec, fixed, cfg.forecast_k, forecast_rng);
    forecast_observations(band, spec, forecast_rng);
    report.forecast = summarize_band(band);
  }

  bool any_pair = false;
  for (std::size_t t = 0; t < series.size(); ++t) any_pair = any_pair || (series[t].y && predicted[t]);
  if (any_pair) report.one_step_mse = one_step_forecast_mse(series, predicted);

  switch (cfg.reference) {
    case ReferenceKind::None: break;
    case ReferenceKind::Kalman: {
      const KalmanResult kr = kalman_filter(series, spec, *cfg.params, cfg.prior);
      Eigen::MatrixXd ref(spec.state_dim(), static_cast<Eigen::Index>(kr.means.size()));
      for (std::size_t t = 0; t < kr.means.size(); ++t) ref.col(static_cast<Eigen::Index>(t)) = kr.means[t];
      report.reference = ref;
      break;
    }
    case ReferenceKind::Pmmh: {
      PmmhTrace trace = pmmh_run(series, spec, cfg.prior, cfg.pmmh, reference_rng);
      report.reference = trace.reference_trajectory();
      report.pmmh = std::move(trace);
      break;
    }
    case ReferenceKind::Path: report.reference = read_trajectory_csv(cfg.reference_path, spec.state_dim()); break;
  }
  if (report.reference && !report.rows.empty()) {
    if (report.reference->cols() != static_cast<Eigen::Index>(report.rows.size()))
      throw ConfigError("reference trajectory has " + std::to_string(report.reference->cols()) +
                        " rows, series has " + std::to_string(report.rows.size()));
    report.state_mse = state_mse(report.filtered_means(), *report.reference);
  }

  nlohmann::json meta = base_meta(cfg, "filter");
  meta["filter"] = report.filter;
  meta["particles"] = cfg.filter_config.n_particles;
  meta["resampler"] = to_string(cfg.filter_config.resampler);
  meta["ess_threshold"] = cfg.filter_config.resample_policy.kind == ResamplePolicy::Kind::EveryStep
                              ? nlohmann::json("every_step")
                              : nlohmann::json(cfg.filter_config.resample_policy.fraction);
  meta["on_collapse"] = cfg.filter_config.on_collapse == CollapsePolicy::Abort ? "abort" : "reset";
  if (cfg.filter == FilterType::Lw)
    meta["liu_west"] = {{"delta", cfg.lw.delta}, {"a", cfg.lw.shrinkage()}, {"h", cfg.lw.bandwidth()}};
  meta["rows"] = report.rows.size();
  meta["missing"] = series.missing_count();
  meta["total_ms"] = report.total_ms;
  meta["mean_iteration_ms"] = report.mean_iteration_ms;
  meta["collapse_resets"] = report.collapse_resets;
  if (!report.final_log_param_variance.empty()) {
    nlohmann::json v;
    for (std::size_t k = 0; k < report.param_names.size(); ++k)
      v[report.param_names[k]] = report.final_log_param_variance[k];
    meta["final_log_param_variance"] = v;
    meta["collapse_warning"] = report.collapse_warning;
    if (report.collapse_warning)
      meta["warning"] = "parameter posterior collapsed: log-scale variance below 1e-6 at the last step";
  }
  if (report.state_mse)
    meta["state_mse"] = std::vector<double>(report.state_mse->data(), report.state_mse->data() + report.state_mse->size());
  if (report.one_step_mse) meta["one_step_mse"] = *report.one_step_mse;
  if (report.pmmh) meta["pmmh"] = pmmh_meta(cfg.pmmh, *report.pmmh, report.param_names);
  report.meta = std::move(meta);
  return report;
}

RunReport run_filter(const RunConfig& config) {
  if (config.input.empty()) throw ConfigError("io.input is required");
  return run_filter(config, parse_csv(config.input));
}

RunReport run_pmmh(const RunConfig& cfg, const TimeSeries& series) {
  if (!cfg.seed) throw ConfigError("io.seed is required (or pass --seed)");
  if (!cfg.pmmh_initial_set) throw ConfigError("pmmh needs pmmh.initial.W (or params.W)");
  const ModelSpec spec = cfg.model_spec();
  series.validate_for(spec);
  validate_pmmh(cfg.pmmh, spec, cfg.prior);

  Rng rng(*cfg.seed);
  RunReport report;
  report.filter = "pmmh";
  report.seed = *cfg.seed;
  report.state_dim = spec.state_dim();
  report.param_names = parameter_names(spec);

  const auto start = Clock::now();
  PmmhTrace trace = pmmh_run(series, spec, cfg.prior, cfg.pmmh, rng);
  const auto stop = Clock::now();
  report.total_ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  report.mean_iteration_ms = report.total_ms / static_cast<double>(cfg.pmmh.n_iter);
  if (!series.empty() && !trace.trajectories.empty()) report.reference = trace.reference_trajectory();

  nlohmann::json meta = base_meta(cfg, "pmmh");
  meta["total_ms"] = report.total_ms;
  meta["mean_iteration_ms"] = report.mean_iteration_ms;
  meta["rows"] = series.size();
  meta["pmmh"] = pmmh_meta(cfg.pmmh, trace, report.param_names);
  report.pmmh = std::move(trace);
  report.meta = std::move(meta);
  return report;
}

void emit_report(const RunReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  const int m = report.state_dim;
  const auto f = format_double;

  if (report.filter != "pmmh") {
    std::string s = "t,y,ess";
    for (int j = 1; j <= m; ++j) {
      const auto k = std::to_string(j);
      s += ",mean_" + k + ",lo_" + k + ",hi_" + k;
    }
    s += ",time_ms\n";
    for (const auto& r : report.rows) {
      s += std::to_string(r.t) + "," + (r.y ? f(*r.y) : "") + "," + f(r.ess);
      for (int j = 0; j < m; ++j) s += "," + f(r.mean[j]) + "," + f(r.lo[j]) + "," + f(r.hi[j]);
      s += "," + f(r.time_ms) + "\n";
    }
    write_file_atomic(path("states.csv"), s);

    std::string p = "t";
    for (const auto& n : report.param_names) p += "," + n + "_mean," + n + "_lo," + n + "_hi";
    p += "\n";
    for (const auto& r : report.rows) {
      p += std::to_string(r.t);
      for (Eigen::Index k = 0; k < r.param_mean.size(); ++k)
        p += "," + f(r.param_mean[k]) + "," + f(r.param_lo[k]) + "," + f(r.param_hi[k]);
      p += "\n";
    }
    write_file_atomic(path("params.csv"), p);

    bool any_one_step = false;
    for (const auto& r : report.rows) any_one_step = any_one_step || r.one_step.has_value();
    if (any_one_step) {
      std::string o = "t,y,y_hat\n";
      for (const auto& r : report.rows)
        o += std::to_string(r.t) + "," + (r.y ? f(*r.y) : "") + "," + (r.one_step ? f(*r.one_step) : "") + "\n";
      write_file_atomic(path("onestep.csv"), o);
    }
  }

  if (report.forecast) {
    const auto& b = *report.forecast;
    std::string s = "tau";
    for (int j = 1; j <= m; ++j) {
      const auto k = std::to_string(j);
      s += ",mean_" + k + ",lo_" + k + ",hi_" + k;
    }
    s += ",y_mean,y_lo,y_hi\n";
    for (Eigen::Index t = 0; t < b.state_mean.rows(); ++t) {
      s += std::to_string(t + 1);
      for (int j = 0; j < m; ++j) s += "," + f(b.state_mean(t, j)) + "," + f(b.state_lo(t, j)) + "," + f(b.state_hi(t, j));
      s += "," + f(b.obs_mean[t]) + "," + f(b.obs_lo[t]) + "," + f(b.obs_hi[t]) + "\n";
    }
    write_file_atomic(path("forecast.csv"), s);
  }

  if (report.pmmh) {
    const auto& tr = *report.pmmh;
    std::string s = "iter,loglik,accepted";
    for (const auto& n : report.param_names) s += "," + n;
    s += "\n";
    for (std::size_t i = 0; i < tr.draws.size(); ++i) {
      s += std::to_string(i + 1) + "," + f(tr.loglik[i]) + "," + (tr.accepted[i] ? "1" : "0");
      const auto& d = tr.draws[i];
      for (Eigen::Index j = 0; j < d.W.rows(); ++j) s += "," + f(d.W(j, j));
      if (d.V) s += "," + f(*d.V);
      s += "\n";
    }
    write_file_atomic(path("pmmh_trace.csv"), s);
  }

  if (report.reference) {
    std::string s = "t";
    for (int j = 1; j <= m; ++j) s += ",mean_" + std::to_string(j);
    s += "\n";
    const auto& ref = *report.reference;
    for (Eigen::Index t = 0; t < ref.cols(); ++t) {
      s += report.rows.size() > static_cast<std::size_t>(t) ? std::to_string(report.rows[static_cast<std::size_t>(t)].t)
                                                            : std::to_string(t + 1);
      for (int j = 0; j < m; ++j) s += "," + f(ref(j, t));
      s += "\n";
    }
    write_file_atomic(path("reference.csv"), s);
  }

  write_file_atomic(path("meta.json"), report.meta.dump(2) + "\n");
}

}  // namespace dglm
