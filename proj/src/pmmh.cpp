#include "dglm/pmmh.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "dglm/errors.hpp"
#include "dglm/filters.hpp"
#include "dglm/kalman.hpp"
#include "kernels.hpp"

namespace dglm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string to_string(LikelihoodSource s) { return s == LikelihoodSource::Smc ? "smc" : "kalman"; }

LikelihoodSource parse_likelihood_source(std::string_view name) {
  if (name == "smc") return LikelihoodSource::Smc;
  if (name == "kalman") return LikelihoodSource::Kalman;
  throw ConfigError("unknown likelihood source '" + std::string(name) + "' (expected smc|kalman)");
}

LoglikEstimate estimate_loglik_with_means(const TimeSeries& series, const ModelSpec& spec,
                                          const ParameterSet& params, const PriorSpec& prior,
                                          int n_particles, Rng& rng, Resampler resampler) {
  FilterConfig config;
  config.n_particles = n_particles;
  config.resampler = resampler;
  const auto T = static_cast<Eigen::Index>(series.size());
  LoglikEstimate out;
  out.filtered_means = Eigen::MatrixXd::Zero(spec.state_dim(), T);
  if (T == 0) return out;

  ParticleSystem ps = init_particles(prior, spec, config, rng);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::MatrixXd next = spec.G() * ps.states;
    detail::add_transition_noise(next, params, rng);
    ps.states = std::move(next);
    const auto& y = series[static_cast<std::size_t>(t)].y;
    if (!y) {
      out.filtered_means.col(t) = weighted_state_mean(ps);
      continue;
    }
    const Eigen::VectorXd raw =
        ps.weights.log_weights + detail::log_likelihoods(spec, ps.states, *y, params);
    const double increment = log_sum_exp(raw);
    if (!std::isfinite(increment)) {
      out.loglik = kNegInf;
      return out;
    }
    out.loglik += increment;
    ps.weights = normalize_log_weights(raw);
    out.filtered_means.col(t) = weighted_state_mean(ps);
    ps.select(resample(resampler, ps.weights, rng));
    ps.weights = WeightVector::uniform(ps.size());
  }
  return out;
}

double estimate_loglik(const TimeSeries& series, const ModelSpec& spec, const ParameterSet& params,
                       const PriorSpec& prior, int n_particles, Rng& rng, Resampler resampler) {
  return estimate_loglik_with_means(series, spec, params, prior, n_particles, rng, resampler).loglik;
}

bool mh_accept(double log_target_prop, double log_target_cur, double u) {
  if (std::isnan(log_target_prop) || log_target_prop == kNegInf) return false;
  if (log_target_cur == kNegInf) return true;
  return std::log(u) < log_target_prop - log_target_cur;
}

double PmmhTrace::acceptance_rate() const {
  return draws.empty() ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(draws.size());
}

std::vector<ParameterSet> PmmhTrace::posterior_draws() const {
  std::vector<ParameterSet> out;
  for (std::size_t i = static_cast<std::size_t>(burn_in); i < draws.size();
       i += static_cast<std::size_t>(thin))
    out.push_back(draws[i]);
  return out;
}

Eigen::MatrixXd PmmhTrace::reference_trajectory() const {
  if (trajectories.empty()) throw ConfigError("pmmh trace holds no stored trajectories");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(trajectories[0].rows(), trajectories[0].cols());
  for (const auto& tr : trajectories) sum += tr;
  return sum / static_cast<double>(trajectories.size());
}

namespace {

double log_ig_unconstrained(double sigma2, const InverseGamma& ig) {
  return ig.shape * std::log(ig.scale) - std::lgamma(ig.shape) - ig.shape * std::log(sigma2) -
         ig.scale / sigma2;
}

std::vector<bool> effective_w_mask(const PmmhConfig& cfg, int m) {
  return cfg.estimate_w.empty() ? std::vector<bool>(static_cast<std::size_t>(m), true) : cfg.estimate_w;
}

}  // namespace

double log_prior_unconstrained(const ParameterSet& params, const PriorSpec& prior,
                               const std::vector<bool>& estimate_w, bool estimate_v) {
  if (!prior.has_diagonal_w_prior()) throw ConfigError("pmmh needs per-component inverse-gamma W priors");
  const auto& comps = prior.w_components();
  double lp = 0.0;
  for (std::size_t j = 0; j < estimate_w.size(); ++j)
    if (estimate_w[j]) lp += log_ig_unconstrained(params.W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)), comps[j]);
  if (estimate_v && params.V && prior.v_prior) lp += log_ig_unconstrained(*params.V, *prior.v_prior);
  return lp;
}

void validate_pmmh(const PmmhConfig& cfg, const ModelSpec& spec, const PriorSpec& prior) {
  if (cfg.n_iter < 1) throw ConfigError("pmmh: iterations must be >= 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_iter)
    throw ConfigError("pmmh: need iterations > burn_in >= 0");
  if (cfg.thin < 1) throw ConfigError("pmmh: thin must be >= 1");
  if (cfg.likelihood == LikelihoodSource::Smc && cfg.n_particles < 2)
    throw ConfigError("pmmh: inner particle count must be >= 2");
  if (cfg.likelihood == LikelihoodSource::Kalman && spec.family() != Family::Normal)
    throw ConfigError("pmmh: the Kalman likelihood needs the Normal family");
  validate_prior(spec, prior);
  if (!prior.has_diagonal_w_prior()) throw ConfigError("pmmh needs per-component inverse-gamma W priors");
  validate_parameters(spec, cfg.initial);
  if (!cfg.initial.is_diagonal()) throw ConfigError("pmmh: initial W must be diagonal");
  const int m = spec.state_dim();
  if (!cfg.estimate_w.empty() && static_cast<int>(cfg.estimate_w.size()) != m)
    throw ConfigError("pmmh: estimate mask length differs from the state dimension");
  const auto mask = effective_w_mask(cfg, m);
  int d = 0;
  for (bool b : mask) d += b ? 1 : 0;
  const bool est_v = cfg.estimate_v && spec.has_observation_variance();
  if (est_v) {
    if (!prior.v_prior) throw ConfigError("pmmh: estimating V needs a V prior");
    ++d;
  }
  if (d == 0) throw ConfigError("pmmh: no parameter is marked for estimation");
  for (int j = 0; j < m; ++j)
    if (mask[static_cast<std::size_t>(j)] && !(cfg.initial.W(j, j) > 0.0))
      throw ConfigError("pmmh: estimated W components need a positive initial value");
  if (cfg.step_covariance.size() > 0) {
    const auto& C = cfg.step_covariance;
    if (C.rows() != d || C.cols() != d)
      throw ConfigError("pmmh: step covariance must be " + std::to_string(d) + "x" + std::to_string(d));
    if (!C.isApprox(C.transpose())) throw ConfigError("pmmh: step covariance must be symmetric");
    if (Eigen::LLT<Eigen::MatrixXd>(C).info() != Eigen::Success)
      throw ConfigError("pmmh: step covariance must be positive definite");
  }
}

PmmhTrace pmmh_run(const TimeSeries& series, const ModelSpec& spec, const PriorSpec& prior,
                   const PmmhConfig& cfg, Rng& rng) {
  validate_pmmh(cfg, spec, prior);
  const int m = spec.state_dim();
  const auto w_mask = effective_w_mask(cfg, m);
  const bool est_v = cfg.estimate_v && spec.has_observation_variance();

  // Log-scale coordinates being moved: W component j, or -1 for V.
  std::vector<int> coords;
  for (int j = 0; j < m; ++j)
    if (w_mask[static_cast<std::size_t>(j)]) coords.push_back(j);
  if (est_v) coords.push_back(-1);
  const auto d = static_cast<Eigen::Index>(coords.size());

  const Eigen::MatrixXd step_cov =
      cfg.step_covariance.size() > 0
          ? cfg.step_covariance
          : Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d) * PmmhConfig::kDefaultStep *
                            PmmhConfig::kDefaultStep);
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(step_cov).matrixL();

  auto evaluate = [&](const ParameterSet& p) -> LoglikEstimate {
    if (cfg.likelihood == LikelihoodSource::Kalman) {
      LoglikEstimate est;
      try {
        const KalmanResult kr = kalman_filter(series, spec, p, prior);
        est.loglik = kr.loglik;
        est.filtered_means.resize(m, static_cast<Eigen::Index>(kr.means.size()));
        for (std::size_t t = 0; t < kr.means.size(); ++t)
          est.filtered_means.col(static_cast<Eigen::Index>(t)) = kr.means[t];
      } catch (const NumericalError&) {
        est.loglik = kNegInf;
      }
      return est;
    }
    return estimate_loglik_with_means(series, spec, p, prior, cfg.n_particles, rng, cfg.resampler);
  };

  PmmhTrace trace;
  trace.burn_in = cfg.burn_in;
  trace.thin = cfg.thin;
  trace.draws.reserve(static_cast<std::size_t>(cfg.n_iter));

  ParameterSet current = cfg.initial;
  LoglikEstimate cur_est = evaluate(current);
  double cur_target = cur_est.loglik + log_prior_unconstrained(current, prior, w_mask, est_v);

  for (int it = 0; it < cfg.n_iter; ++it) {
    const Eigen::VectorXd step = L * rng.normal_vector(d);
    ParameterSet proposal = current;
    for (Eigen::Index k = 0; k < d; ++k) {
      const int c = coords[static_cast<std::size_t>(k)];
      if (c >= 0)
        proposal.W(c, c) = std::exp(std::log(current.W(c, c)) + step[k]);
      else
        proposal.V = std::exp(std::log(*current.V) + step[k]);
    }
    LoglikEstimate prop_est = evaluate(proposal);
    const double prop_target =
        prop_est.loglik + log_prior_unconstrained(proposal, prior, w_mask, est_v);
    const bool accept = mh_accept(prop_target, cur_target, rng.uniform());
    if (accept) {
      current = std::move(proposal);
      cur_est = std::move(prop_est);
      cur_target = prop_target;
      ++trace.accept_count;
    }
    trace.draws.push_back(current);
    trace.loglik.push_back(cur_est.loglik);
    trace.log_target.push_back(cur_target);
    trace.accepted.push_back(accept);
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      trace.stored_iterations.push_back(it);
      if (cfg.store_trajectories) trace.trajectories.push_back(cur_est.filtered_means);
    }
  }
  return trace;
}

}  // namespace dglm
