// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Setups are simulated so every number has an oracle.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dglm/config.hpp"
#include "dglm/errors.hpp"
#include "dglm/filters.hpp"
#include "dglm/forecast.hpp"
#include "dglm/io.hpp"
#include "dglm/kalman.hpp"
#include "dglm/learning.hpp"
#include "dglm/pmmh.hpp"
#include "dglm/resampling.hpp"
#include "dglm/run.hpp"
#include "dglm/stats.hpp"
#include "oracles.hpp"

using namespace dglm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void gate(bool ok, const std::string& what) {
    pass = pass && ok;
    note((ok ? "" : "[miss] ") + what);
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Locally constant Normal DLM shared by several criteria.
const ModelSpec kLevel(Family::Normal, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1));

PriorSpec level_prior(InverseGamma w = {2, 0.1}, InverseGamma v = {2, 1}) {
  PriorSpec p;
  p.m0 = Eigen::VectorXd::Zero(1);
  p.C0 = Eigen::MatrixXd::Ones(1, 1);
  p.w_prior = std::vector<InverseGamma>{w};
  p.v_prior = v;
  return p;
}

ParameterSet level_params(double w, double v) {
  return ParameterSet::diagonal(Eigen::VectorXd::Constant(1, w), v);
}

TimeSeries simulate_level(double w, double v, int T, std::uint64_t seed) {
  Rng rng(seed);
  return simulate(kLevel, level_params(w, v), level_prior(), T, rng).series;
}

FilterConfig filter_config(int n) {
  FilterConfig c;
  c.n_particles = n;
  return c;
}

using StepFn = void (*)(ParticleSystem&, const ModelSpec&, const ParameterSet&, double, const FilterConfig&, Rng&);

// Particle filtered means for a fully observed series.
std::vector<double> particle_means(StepFn step, const TimeSeries& s, const ParameterSet& p, int n,
                                   std::uint64_t seed) {
  Rng rng(seed);
  ParticleSystem ps = init_particles(level_prior(), kLevel, filter_config(n), rng);
  std::vector<double> out;
  for (const auto& o : s) {
    step(ps, kLevel, p, *o.y, filter_config(n), rng);
    out.push_back(weighted_state_mean(ps)[0]);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome kalman_equivalence() {
  Outcome r;
  const ParameterSet p = level_params(0.1, 1.0);
  const TimeSeries s = simulate_level(0.1, 1.0, 200, 2024);
  const KalmanResult kr = kalman_filter(s, kLevel, p, level_prior());
  for (auto [name, step] : {std::pair{"sir", StepFn(&sir_step)}, std::pair{"apf", StepFn(&apf_step)}}) {
    const auto start = Clock::now();
    const auto means = particle_means(step, s, p, 10000, 7);
    const double secs = seconds_since(start);
    double err = 0;
    for (std::size_t t = 0; t < means.size(); ++t) err += std::abs(means[t] - kr.means[t][0]);
    err /= static_cast<double>(means.size());
    r.gate(err <= 0.05, std::string(name) + " mean abs error " + fmt("%.4f", err) + " (<= 0.05)");
    r.gate(secs <= 10.0, std::string(name) + " time " + fmt("%.2f", secs) + " s (<= 10)");
  }
  return r;
}

Outcome monte_carlo_rate() {
  Outcome r;
  const ParameterSet p = level_params(0.1, 1.0);
  const TimeSeries s = simulate_level(0.1, 1.0, 200, 2024);
  const KalmanResult kr = kalman_filter(s, kLevel, p, level_prior());
  auto rmse = [&](int n, std::uint64_t seed) {
    const auto means = particle_means(&sir_step, s, p, n, seed);
    double sq = 0;
    for (std::size_t t = 0; t < means.size(); ++t) sq += std::pow(means[t] - kr.means[t][0], 2);
    return std::sqrt(sq / static_cast<double>(means.size()));
  };
  double small = 0, large = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    small += rmse(1000, 100 + seed);
    large += rmse(4000, 200 + seed);
  }
  const double ratio = small / large;
  r.gate(ratio >= 1.5 && ratio <= 2.7, "RMSE(1000)/RMSE(4000) = " + fmt("%.3f", ratio) + " (in [1.5, 2.7], ideal 2)");
  return r;
}

Outcome marginal_likelihood() {
  Outcome r;
  const ParameterSet p = level_params(0.1, 1.0);
  const TimeSeries s = simulate_level(0.1, 1.0, 100, 31);
  const double exact = kalman_loglik(s, kLevel, p, level_prior());
  double abs_sum = 0;
  int positive = 0;
  const int reps = 20;
  for (int i = 0; i < reps; ++i) {
    Rng rng(500 + static_cast<std::uint64_t>(i));
    const double d = estimate_loglik(s, kLevel, p, level_prior(), 10000, rng) - exact;
    abs_sum += std::abs(d);
    positive += d > 0 ? 1 : 0;
  }
  const double mean_abs = abs_sum / reps;
  const double p_pos = oracle::sign_test_upper(positive, reps);
  r.gate(mean_abs <= 0.5, "mean |loglik error| " + fmt("%.4f", mean_abs) + " (<= 0.5)");
  r.gate(p_pos > 0.01, std::to_string(positive) + "/20 positive, one-sided p(positive bias) = " + fmt("%.3g", p_pos) + " (> 0.01)");
  r.note("two-sided view: p(negative bias) = " + fmt("%.3g", oracle::sign_test_lower(positive, reps)));
  return r;
}

Outcome resampler_correctness() {
  Outcome r;
  Rng rng(41);
  int sys_bad = 0, strat_bad = 0, vectors = 0;
  for (int n : {4, 16, 100}) {
    for (int rep = 0; rep < 1000; ++rep, ++vectors) {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = (rep % 4 == 0 && rng.uniform() < 0.3) ? 0.0 : rng.exponential();
      if (w.sum() == 0) w[0] = 1;
      w /= w.sum();
      WeightVector wv;
      wv.log_weights = w.array().log().matrix();
      wv.normalized = true;
      const auto sys = offspring_counts(resample(Resampler::Systematic, wv, rng), n);
      const auto strat = offspring_counts(resample(Resampler::Stratified, wv, rng), n);
      for (int i = 0; i < n; ++i) {
        const double target = n * w[i];
        const int c = sys[static_cast<std::size_t>(i)];
        if (c < std::floor(target - 1e-9) || c > std::ceil(target + 1e-9)) ++sys_bad;
        if (std::abs(strat[static_cast<std::size_t>(i)] - target) >= 2.0) ++strat_bad;
      }
    }
  }
  r.gate(sys_bad == 0, "(a) systematic floor/ceil violations " + std::to_string(sys_bad) + " over " + std::to_string(vectors) + " vectors");
  r.gate(strat_bad == 0, "(b) stratified |count - N w| >= 2: " + std::to_string(strat_bad));

  const Eigen::Vector3d p(0.7, 0.2, 0.1);
  WeightVector wv;
  wv.log_weights = p.array().log().matrix();
  wv.normalized = true;
  const int reps = 100000, n = 3;
  Eigen::Vector3d total = Eigen::Vector3d::Zero();
  for (int k = 0; k < reps; ++k) {
    const auto c = offspring_counts(resample(Resampler::Multinomial, wv, rng), n);
    for (int i = 0; i < 3; ++i) total[i] += c[static_cast<std::size_t>(i)];
  }
  double worst = 0;
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(n * p[i] * (1 - p[i]) / reps);
    worst = std::max(worst, std::abs(total[i] / reps - n * p[i]) / se);
  }
  r.gate(worst < 4.0, "(c) multinomial worst deviation " + fmt("%.2f", worst) + " SE (< 4)");
  return r;
}

Outcome ess_cases() {
  Outcome r;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double uniform = ess(WeightVector::uniform(1000));
  Eigen::VectorXd atom = Eigen::VectorXd::Constant(50, kNegInf);
  atom[17] = 0.0;
  const double single = ess(atom);
  const double half = ess(Eigen::Vector4d(std::log(0.5), std::log(0.5), kNegInf, kNegInf));
  r.gate(uniform == 1000.0, "uniform N=1000 -> " + fmt("%.17g", uniform));
  r.gate(single == 1.0, "single atom -> " + fmt("%.17g", single));
  r.gate(half == 2.0, "(1/2, 1/2, 0, 0) -> " + fmt("%.17g", half));
  return r;
}

Outcome lw_moments() {
  Outcome r;
  const int n = 100000;
  Eigen::Vector2d mu(-2.0, 0.5);
  Eigen::Matrix2d cov;
  cov << 0.3, 0.1, 0.1, 0.2;
  const Eigen::MatrixXd L = cov.llt().matrixL();
  for (double delta : {0.95, 0.98, 0.99}) {
    Rng rng(60 + static_cast<std::uint64_t>(delta * 100));
    Eigen::MatrixXd phi(2, n);
    for (int i = 0; i < n; ++i) phi.col(i) = mu + L * rng.normal_vector(2);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    const LwConfig lw{delta};
    const ShrinkResult s = lw_shrink_locations(phi, w, lw.shrinkage());
    Eigen::MatrixXd jittered = s.locations;
    lw_jitter(jittered, s.variance, lw.bandwidth(), rng);
    const Eigen::Vector2d mean = jittered.rowwise().mean();
    const Eigen::MatrixXd centered = jittered.colwise() - mean;
    const Eigen::Matrix2d var = centered * centered.transpose() / n;
    const double mean_err = ((mean - s.mean).array() / s.mean.array().abs()).abs().maxCoeff();
    const double var_err = ((var.diagonal() - s.variance.diagonal()).array() / s.variance.diagonal().array()).abs().maxCoeff();
    r.gate(mean_err < 0.01, "delta " + fmt("%.2f", delta) + ": mean rel err " + fmt("%.4f", mean_err));
    r.gate(var_err < 0.02, "delta " + fmt("%.2f", delta) + ": variance rel err " + fmt("%.4f", var_err));
  }
  return r;
}

Outcome conjugate_update() {
  Outcome r;
  // Integers over 2 are exact in binary floating point, so the update is
  // checked for equality. The draw is replayed from a copied generator.
  Rng gen(71);
  const ModelSpec spec(Family::Normal, Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity());
  int param_bad = 0, draw_bad = 0;
  for (int k = 0; k < 50; ++k) {
    const long a2 = 1 + static_cast<long>(gen.uniform() * 10), b2 = 1 + static_cast<long>(gen.uniform() * 10);
    const long n = static_cast<long>(gen.uniform() * 40);
    const long ss[2] = {static_cast<long>(gen.uniform() * 100), static_cast<long>(gen.uniform() * 100)};
    const long rr = static_cast<long>(gen.uniform() * 100), nr = static_cast<long>(gen.uniform() * (n + 1));

    PriorSpec prior;
    prior.m0 = Eigen::Vector2d::Zero();
    prior.C0 = Eigen::Matrix2d::Identity();
    prior.w_prior = std::vector<InverseGamma>{{a2 / 2.0, b2 / 2.0}, {a2 / 2.0 + 1, b2 / 2.0 + 1}};
    prior.v_prior = InverseGamma{a2 / 2.0, b2 / 2.0};
    SufficientStatistics s = SufficientStatistics::zeros(2);
    s.n_obs = static_cast<double>(n);
    s.sq_increments = Eigen::Vector2d(static_cast<double>(ss[0]), static_cast<double>(ss[1]));
    s.n_residuals = static_cast<double>(nr);
    s.sq_residuals = static_cast<double>(rr);

    // hand: α = (2α₀ + n)/2, β = (2β₀ + Σ)/2
    const double hand_shape[3] = {(a2 + n) / 2.0, (a2 + 2 + n) / 2.0, (a2 + nr) / 2.0};
    const double hand_scale[3] = {(b2 + ss[0]) / 2.0, (b2 + 2 + ss[1]) / 2.0, (b2 + rr) / 2.0};
    const InverseGamma got[3] = {inverse_gamma_posterior(prior.w_components()[0], s.n_obs, s.sq_increments[0]),
                                 inverse_gamma_posterior(prior.w_components()[1], s.n_obs, s.sq_increments[1]),
                                 inverse_gamma_posterior(*prior.v_prior, s.n_residuals, s.sq_residuals)};
    for (int j = 0; j < 3; ++j)
      if (got[j].shape != hand_shape[j] || got[j].scale != hand_scale[j]) ++param_bad;

    Rng a(1000 + static_cast<std::uint64_t>(k));
    Rng b = a;
    const ParameterSet d = draw_parameters(s, prior, a);
    const double w1 = b.inverse_gamma(hand_shape[0], hand_scale[0]);
    const double w2 = b.inverse_gamma(hand_shape[1], hand_scale[1]);
    const double v = b.inverse_gamma(hand_shape[2], hand_scale[2]);
    if (d.W(0, 0) != w1 || d.W(1, 1) != w2 || *d.V != v || d.W(0, 1) != 0.0) ++draw_bad;
  }
  r.gate(param_bad == 0, "posterior parameter mismatches " + std::to_string(param_bad) + "/150");
  r.gate(draw_bad == 0, "draws not from the hand posterior " + std::to_string(draw_bad) + "/50");
  return r;
}

Outcome parameter_recovery() {
  Outcome r;
  const double truth = 0.01;
  const ModelSpec spec(Family::Poisson, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1));
  PriorSpec prior;
  prior.m0 = Eigen::VectorXd::Constant(1, 2.0);
  prior.C0 = Eigen::MatrixXd::Constant(1, 1, 0.1);
  prior.w_prior = std::vector<InverseGamma>{{2.0, 0.02}};
  Rng sim_rng(81);
  const TimeSeries s = simulate(spec, ParameterSet::diagonal(Eigen::VectorXd::Constant(1, truth)), prior, 500, sim_rng).series;

  PmmhConfig cfg;
  cfg.n_iter = 5000;
  cfg.burn_in = 1000;
  cfg.n_particles = 500;
  cfg.initial = ParameterSet::diagonal(Eigen::VectorXd::Constant(1, 0.02));
  cfg.step_covariance = Eigen::MatrixXd::Constant(1, 1, 0.3 * 0.3);
  cfg.store_trajectories = false;
  Rng pm_rng(82);
  const auto start = Clock::now();
  const PmmhTrace tr = pmmh_run(s, spec, prior, cfg, pm_rng);
  const double secs = seconds_since(start);
  std::vector<double> draws;
  for (const auto& d : tr.posterior_draws()) draws.push_back(d.W(0, 0));
  const double lo = oracle::quantile(draws, 0.025), hi = oracle::quantile(draws, 0.975);
  r.note("PMMH 95% interval [" + fmt("%.4g", lo) + ", " + fmt("%.4g", hi) + "], acceptance " +
         fmt("%.2f", tr.acceptance_rate()));
  r.gate(secs <= 600.0, "PMMH time " + fmt("%.1f", secs) + " s (<= 600)");

  const int n = 5000;
  for (int which = 0; which < 2; ++which) {
    Rng rng(83 + static_cast<std::uint64_t>(which));
    ParticleSystem ps = init_learning_particles(prior, spec, filter_config(n), rng);
    for (const auto& o : s) {
      if (which == 0)
        storvik_step(ps, spec, prior, *o.y, filter_config(n), rng);
      else
        pl_step(ps, spec, prior, *o.y, filter_config(n), rng);
    }
    const double est = weighted_mean(ps.params->w.row(0).transpose(), ps.weights.weights());
    const std::string name = which == 0 ? "storvik" : "pl";
    r.gate(est >= truth / 2 && est <= truth * 2, name + " posterior mean " + fmt("%.4g", est) + " within 2x of " + fmt("%.2g", truth));
    r.gate(est >= lo && est <= hi, name + " inside the PMMH interval");
  }
  return r;
}

Outcome pseudo_marginal() {
  Outcome r;
  const TimeSeries s = simulate_level(0.3, 1.0, 50, 91);
  const PriorSpec prior = level_prior({2, 0.3}, {2, 1});
  auto chain = [&](LikelihoodSource src, std::uint64_t seed) {
    PmmhConfig cfg;
    cfg.thin = 20;
    cfg.burn_in = 2000;
    cfg.n_iter = cfg.burn_in + 5000 * cfg.thin;
    cfg.n_particles = 200;
    cfg.likelihood = src;
    cfg.initial = level_params(0.3, 1.0);
    cfg.estimate_v = false;
    cfg.step_covariance = Eigen::MatrixXd::Constant(1, 1, 0.6 * 0.6);
    cfg.store_trajectories = false;
    Rng rng(seed);
    const PmmhTrace tr = pmmh_run(s, kLevel, prior, cfg, rng);
    std::vector<double> out;
    for (const auto& d : tr.posterior_draws()) out.push_back(d.W(0, 0));
    return std::pair{out, tr.acceptance_rate()};
  };
  const auto [smc, acc_smc] = chain(LikelihoodSource::Smc, 92);
  const auto [exact, acc_exact] = chain(LikelihoodSource::Kalman, 93);
  const oracle::KsResult ks = oracle::ks_two_sample(smc, exact);
  r.note(std::to_string(smc.size()) + " + " + std::to_string(exact.size()) + " thinned draws, acceptance " +
         fmt("%.2f", acc_smc) + " / " + fmt("%.2f", acc_exact));
  r.note("posterior means " + fmt("%.4f", oracle::mean(smc)) + " vs " + fmt("%.4f", oracle::mean(exact)));
  r.gate(ks.p_value > 0.01, "KS D = " + fmt("%.4f", ks.statistic) + ", p = " + fmt("%.3g", ks.p_value) + " (> 0.01)");
  return r;
}

RunConfig learning_config(const std::string& filter, int n, std::uint64_t seed) {
  RunConfig cfg = parse_config(
      "format = dglm-config/1\n"
      "model.components = lc\n"
      "model.family = normal\n"
      "params.W = 0.1\n"
      "params.V = 1\n"
      "prior.W = ig(2, 0.1)\n"
      "prior.V = ig(2, 1)\n"
      "filter.delta = 0.98\n");
  cfg.filter = parse_filter_type(filter);
  cfg.filter_config.n_particles = n;
  cfg.seed = seed;
  return cfg;
}

Outcome qualitative_orderings() {
  Outcome r;
  const char* names[3] = {"lw", "storvik", "pl"};
  double mean_ess[3] = {0, 0, 0}, mean_ms[3] = {0, 0, 0};
  const int seeds = 20;
  for (int k = 0; k < seeds; ++k) {
    const TimeSeries s = simulate_level(0.1, 1.0, 200, 1100 + static_cast<std::uint64_t>(k));
    for (int f = 0; f < 3; ++f) {
      const RunReport rep = run_filter(learning_config(names[f], 1000, 1200 + static_cast<std::uint64_t>(k)), s);
      double e = 0;
      for (const auto& row : rep.rows) e += row.ess;
      mean_ess[f] += e / static_cast<double>(rep.rows.size()) / seeds;
      mean_ms[f] += rep.mean_iteration_ms / seeds;
    }
  }
  r.note("mean ESS lw/storvik/pl " + fmt("%.0f", mean_ess[0]) + "/" + fmt("%.0f", mean_ess[1]) + "/" + fmt("%.0f", mean_ess[2]));
  r.gate(mean_ess[2] >= mean_ess[1], "PL ESS >= Storvik ESS");
  r.note("ms/iteration lw/storvik/pl " + fmt("%.3f", mean_ms[0]) + "/" + fmt("%.3f", mean_ms[1]) + "/" + fmt("%.3f", mean_ms[2]));
  r.gate(mean_ms[0] <= mean_ms[1] && mean_ms[0] <= mean_ms[2], "LW time <= Storvik and PL");

  // diagnostic only: small-N contrast on a long series
  const TimeSeries long_series = simulate_level(0.1, 1.0, 2000, 1300);
  std::string collapse = "N=100, T=2000 min log-variance";
  bool contrast = true;
  for (int f = 0; f < 3; ++f) {
    const RunReport rep = run_filter(learning_config(names[f], 100, 1301), long_series);
    double lowest = INFINITY;
    for (double v : rep.final_log_param_variance) lowest = std::min(lowest, v);
    collapse += std::string(" ") + names[f] + "=" + fmt("%.3g", lowest);
    contrast = contrast && (f == 0 ? rep.collapse_warning : !rep.collapse_warning);
  }
  r.note(collapse + (contrast ? " (LW collapses, others do not)" : " (contrast not reproduced; not gated)"));
  return r;
}

Outcome forecast_sanity() {
  Outcome r;
  const ParameterSet p = level_params(0.1, 1.0);
  {
    const TimeSeries s = simulate_level(0.1, 1.0, 200, 2024);
    const KalmanResult kr = kalman_filter(s, kLevel, p, level_prior());
    const KalmanForecast kf = kalman_forecast({kr.means.back(), kr.covariances.back(), kr.loglik}, kLevel, p, 50);
    Rng rng(111);
    ParticleSystem ps = init_particles(level_prior(), kLevel, filter_config(10000), rng);
    for (const auto& o : s) sir_step(ps, kLevel, p, *o.y, filter_config(10000), rng);
    const ForecastBand band = forecast_states(ps, kLevel, p, 50, rng);
    const BandSummary sum = summarize_band(band);
    double err = 0;
    for (int k = 0; k < 50; ++k) err += std::abs(sum.state_mean(k, 0) - kf.means[static_cast<std::size_t>(k)][0]);
    err /= 50;
    r.gate(err <= 0.05, "k=50 state mean abs error vs Kalman " + fmt("%.4f", err) + " (<= 0.05)");
  }
  int inside = 0, total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng sim(3000 + static_cast<std::uint64_t>(rep));
    const TimeSeries full = simulate(kLevel, p, level_prior(), 150, sim).series;
    Rng rng(4000 + static_cast<std::uint64_t>(rep));
    ParticleSystem ps = init_particles(level_prior(), kLevel, filter_config(1000), rng);
    for (std::size_t t = 0; t < 100; ++t) sir_step(ps, kLevel, p, *full[t].y, filter_config(1000), rng);
    ForecastBand band = forecast_states(ps, kLevel, p, 50, rng);
    forecast_observations(band, kLevel, rng);
    const BandSummary sum = summarize_band(band, 0.95);
    for (int k = 0; k < 50; ++k) {
      const double y = *full[100 + static_cast<std::size_t>(k)].y;
      inside += (y >= sum.obs_lo[k] && y <= sum.obs_hi[k]) ? 1 : 0;
      ++total;
    }
  }
  const double coverage = 100.0 * inside / total;
  r.gate(coverage >= 90 && coverage <= 99, "95% band coverage " + fmt("%.2f", coverage) + "% over 200 replicates x 50 horizons");
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility_io() {
  Outcome r;
  const fs::path root = fs::temp_directory_path() / "dglm_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  TimeSeries s;
  {
    const TimeSeries base = simulate_level(0.1, 1.0, 60, 1201);
    for (const auto& o : base) s.push_back(o.t, (o.t >= 20 && o.t <= 22) ? std::nullopt : o.y);
  }

  // byte-identical reports for every filter and for PMMH
  int differing = 0;
  for (const char* f : {"sis", "sir", "apf", "lw", "storvik", "pl", "pmmh"}) {
    RunConfig cfg = learning_config(std::string(f) == "pmmh" ? "sir" : f, 300, 1202);
    cfg.record_timing = false;
    cfg.forecast_k = 5;
    cfg.one_step = true;
    cfg.reference = ReferenceKind::Kalman;
    cfg.pmmh.n_iter = 150;
    cfg.pmmh.burn_in = 50;
    cfg.pmmh.n_particles = 50;
    cfg.pmmh.initial = *cfg.params;
    const fs::path a = root / (std::string(f) + "_a"), b = root / (std::string(f) + "_b");
    for (const auto& dir : {a, b}) {
      const RunReport rep = std::string(f) == "pmmh" ? run_pmmh(cfg, s) : run_filter(cfg, s);
      emit_report(rep, dir.string());
    }
    for (const auto& entry : fs::directory_iterator(a))
      if (slurp(entry.path()) != slurp(b / entry.path().filename())) ++differing;
  }
  r.gate(differing == 0, "report files differing between identical runs: " + std::to_string(differing));

  // CSV round trip
  const fs::path csv = root / "series.csv";
  write_series_csv(csv.string(), s);
  const TimeSeries back = parse_csv(csv.string());
  bool same = back.size() == s.size();
  for (std::size_t i = 0; same && i < s.size(); ++i) same = back[i].t == s[i].t && back[i].y == s[i].y;
  r.gate(same, "CSV round trip exact (" + std::to_string(s.size()) + " rows, 3 missing)");

  // missing rows: empty y, and weights carried (ESS stays N after a resampled step)
  RunConfig cfg = learning_config("sir", 300, 1203);
  cfg.record_timing = false;
  const RunReport rep = run_filter(cfg, s);
  emit_report(rep, (root / "missing").string());
  std::stringstream lines(slurp(root / "missing" / "states.csv"));
  int empty_rows = 0;
  for (std::string line; std::getline(lines, line);) {
    const auto comma = line.find(',');
    if (comma != std::string::npos && line.size() > comma + 1 && line[comma + 1] == ',') ++empty_rows;
  }
  bool carried = true;
  for (const auto& row : rep.rows)
    if (!row.y) carried = carried && row.ess == 300.0;
  r.gate(empty_rows == 3, "rows written with empty y: " + std::to_string(empty_rows) + " (expected 3)");
  r.gate(carried, "missing steps keep the weights (ESS = N)");
  fs::remove_all(root);
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Kalman equivalence", kalman_equivalence},
      {"Monte Carlo rate", monte_carlo_rate},
      {"marginal likelihood", marginal_likelihood},
      {"resampler correctness", resampler_correctness},
      {"ESS exact cases", ess_cases},
      {"Liu-West moments", lw_moments},
      {"conjugate update", conjugate_update},
      {"parameter recovery", parameter_recovery},
      {"pseudo-marginal exactness", pseudo_marginal},
      {"qualitative orderings", qualitative_orderings},
      {"forecast sanity", forecast_sanity},
      {"reproducibility and IO", reproducibility_io},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(start), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
