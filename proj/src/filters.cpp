#include "dglm/filters.hpp"

#include <cmath>

#include "dglm/errors.hpp"
#include "kernels.hpp"

namespace dglm {

SufficientStatistics SufficientStatistics::zeros(int state_dim, bool track_cross) {
  SufficientStatistics s;
  s.sq_increments = Eigen::VectorXd::Zero(state_dim);
  if (track_cross) s.cross_matrix = Eigen::MatrixXd::Zero(state_dim, state_dim);
  return s;
}

SuffStatsBlock SuffStatsBlock::zeros(int state_dim, int n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(state_dim, n),
          Eigen::VectorXd::Zero(n)};
}

SufficientStatistics SuffStatsBlock::at(int i) const {
  SufficientStatistics s;
  s.n_obs = n_obs[i];
  s.n_residuals = n_residuals[i];
  s.sq_increments = sq_increments.col(i);
  s.sq_residuals = sq_residuals[i];
  return s;
}

void SuffStatsBlock::set(int i, const SufficientStatistics& s) {
  n_obs[i] = s.n_obs;
  n_residuals[i] = s.n_residuals;
  sq_increments.col(i) = s.sq_increments;
  sq_residuals[i] = s.sq_residuals;
}

ParameterSet ParticleParams::at(int i) const {
  std::optional<double> vi;
  if (has_v()) vi = v[i];
  return ParameterSet::diagonal(w.col(i), vi);
}

ParticleParams ParticleParams::broadcast(const ParameterSet& params, int n) {
  ParticleParams p;
  p.w = params.W.diagonal().replicate(1, n);
  if (params.V) p.v = Eigen::VectorXd::Constant(n, *params.V);
  return p;
}

void ParticleSystem::select(const IndexAssignment& parents) {
  states = detail::select_columns(states, parents);
  if (params) {
    params->w = detail::select_columns(params->w, parents);
    if (params->has_v()) params->v = detail::select_entries(params->v, parents);
  }
  if (suffstats) {
    suffstats->n_obs = detail::select_entries(suffstats->n_obs, parents);
    suffstats->n_residuals = detail::select_entries(suffstats->n_residuals, parents);
    suffstats->sq_increments = detail::select_columns(suffstats->sq_increments, parents);
    suffstats->sq_residuals = detail::select_entries(suffstats->sq_residuals, parents);
  }
}

void ParticleSystem::check_consistent() const {
  const int n = size();
  if (weights.size() != n) throw ConfigError("particle system: weight count differs from N_p");
  if (params && (params->size() != n || (params->has_v() && params->v.size() != n)))
    throw ConfigError("particle system: parameter count differs from N_p");
  if (suffstats && suffstats->size() != n)
    throw ConfigError("particle system: sufficient-statistic count differs from N_p");
}

void FilterConfig::validate() const {
  if (n_particles < 2) throw ConfigError("filter: n_particles must be >= 2");
  if (resample_policy.kind == ResamplePolicy::Kind::EssBelow &&
      !(resample_policy.fraction > 0.0 && resample_policy.fraction <= 1.0))
    throw ConfigError("filter: ESS threshold fraction must be in (0, 1]");
}

ParticleSystem init_particles(const PriorSpec& prior, const ModelSpec& spec,
                              const FilterConfig& config, Rng& rng) {
  config.validate();
  const int m = spec.state_dim();
  if (prior.m0.size() != m || prior.C0.rows() != m)
    throw ConfigError("init_particles: prior dimensions do not match the model");
  const int n = config.n_particles;
  ParticleSystem ps;
  ps.states = prior.m0.replicate(1, n);
  detail::add_noise_full(ps.states, covariance_factor(prior.C0), rng);
  ps.weights = WeightVector::uniform(n);
  return ps;
}

void sis_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params, double y,
              const FilterConfig& config, Rng& rng) {
  Eigen::MatrixXd next = spec.G() * ps.states;
  detail::add_transition_noise(next, params, rng);
  ps.states = std::move(next);
  const Eigen::VectorXd raw =
      ps.weights.log_weights + detail::log_likelihoods(spec, ps.states, y, params);
  ps.weights = detail::normalize_for_step(raw, config, ps);
  ps.ess_trace.push_back(ess(ps.weights));
  ++ps.t;
}

void sir_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params, double y,
              const FilterConfig& config, Rng& rng) {
  sis_step(ps, spec, params, y, config, rng);
  if (config.resample_policy.should_resample(ps.ess_trace.back(), ps.size())) {
    ps.select(resample(config.resampler, ps.weights, rng));
    ps.weights = WeightVector::uniform(ps.size());
  }
}

void apf_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params, double y,
              const FilterConfig& config, Rng& rng) {
  const Eigen::MatrixXd mu = spec.G() * ps.states;
  const Eigen::VectorXd ll_mu = detail::log_likelihoods(spec, mu, y, params);
  const WeightVector first = detail::normalize_for_step(ps.weights.log_weights + ll_mu, config, ps);
  const IndexAssignment parents = resample(config.resampler, first, rng);

  Eigen::MatrixXd next = detail::select_columns(mu, parents);
  detail::add_transition_noise(next, params, rng);
  ps.states = std::move(next);

  const Eigen::VectorXd raw = detail::second_stage_log_weights(
      detail::log_likelihoods(spec, ps.states, y, params), detail::select_entries(ll_mu, parents));
  ps.weights = detail::normalize_for_step(raw, config, ps);
  ps.ess_trace.push_back(ess(ps.weights));
  ++ps.t;
}

void propagate_only_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params,
                         Rng& rng) {
  Eigen::MatrixXd next = spec.G() * ps.states;
  detail::add_transition_noise(next, params, rng);
  ps.states = std::move(next);
  ps.ess_trace.push_back(ess(ps.weights));
  ++ps.t;
}

Eigen::VectorXd weighted_state_mean(const ParticleSystem& ps) {
  return ps.states * ps.weights.weights();
}

}  // namespace dglm
