#include "dglm/learning.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "dglm/errors.hpp"
#include "kernels.hpp"

namespace dglm {

SufficientStatistics update_suffstats(const SufficientStatistics& s, const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& theta_prev, std::optional<double> y,
                                      const ModelSpec& spec) {
  const int m = spec.state_dim();
  if (theta.size() != m || theta_prev.size() != m || s.sq_increments.size() != m)
    throw ConfigError("update_suffstats: dimension mismatch");
  SufficientStatistics out = s;
  const Eigen::VectorXd inc = theta - spec.G() * theta_prev;
  out.n_obs += 1.0;
  out.sq_increments += inc.cwiseAbs2();
  if (out.cross_matrix) *out.cross_matrix += inc * inc.transpose();
  if (y && spec.has_observation_variance()) {
    const double r = *y - spec.F().dot(theta);
    out.n_residuals += 1.0;
    out.sq_residuals += r * r;
  }
  return out;
}

InverseGamma inverse_gamma_posterior(const InverseGamma& prior, double n, double sum_of_squares) {
  return {prior.shape + 0.5 * n, prior.scale + 0.5 * sum_of_squares};
}

Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng) {
  const Eigen::Index m = scale.rows();
  if (!(dof > static_cast<double>(m) - 1.0))
    throw ConfigError("inverse Wishart: dof must exceed m - 1");
  // X ~ Wishart(dof, scale⁻¹) by the Bartlett decomposition, return X⁻¹.
  const Eigen::MatrixXd precision = scale.inverse();
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(0.5 * (precision + precision.transpose())).matrixL();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, i) = std::sqrt(2.0 * rng.gamma(0.5 * (dof - static_cast<double>(i))));
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  const Eigen::MatrixXd LA = L * A;
  const Eigen::MatrixXd X = LA * LA.transpose();
  Eigen::MatrixXd out = X.inverse();
  return 0.5 * (out + out.transpose());
}

ParameterSet draw_parameters(const SufficientStatistics& s, const PriorSpec& prior, Rng& rng) {
  ParameterSet out;
  if (prior.has_diagonal_w_prior()) {
    const auto& comps = prior.w_components();
    const auto m = static_cast<Eigen::Index>(comps.size());
    if (s.sq_increments.size() != m) throw ConfigError("draw_parameters: dimension mismatch");
    Eigen::VectorXd w(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const InverseGamma post =
          inverse_gamma_posterior(comps[static_cast<std::size_t>(j)], s.n_obs, s.sq_increments[j]);
      w[j] = rng.inverse_gamma(post.shape, post.scale);
    }
    out.W = w.asDiagonal();
  } else {
    const auto& iw = std::get<InverseWishart>(prior.w_prior);
    Eigen::MatrixXd scale = iw.scale;
    if (s.cross_matrix) scale += *s.cross_matrix;
    out.W = draw_inverse_wishart(iw.dof + s.n_obs, scale, rng);
  }
  if (prior.v_prior) {
    const InverseGamma post = inverse_gamma_posterior(*prior.v_prior, s.n_residuals, s.sq_residuals);
    out.V = rng.inverse_gamma(post.shape, post.scale);
  }
  return out;
}

double LwConfig::bandwidth() const {
  const double a = shrinkage();
  return std::sqrt(std::max(0.0, 1.0 - a * a));
}

void LwConfig::validate() const {
  if (!(delta >= 1.0 / 3.0 && delta <= 1.0))
    throw ConfigError("liu-west: delta must lie in [1/3, 1] so that a = (3δ-1)/(2δ) is in [0, 1]");
}

ShrinkResult lw_shrink_locations(const Eigen::MatrixXd& params, const Eigen::VectorXd& weights,
                                 double shrinkage) {
  if (params.cols() < 2) throw ConfigError("lw_shrink_locations: need at least 2 particles");
  if (weights.size() != params.cols()) throw ConfigError("lw_shrink_locations: weight count mismatch");
  ShrinkResult r;
  r.mean = params * weights;
  const Eigen::MatrixXd centered = params.colwise() - r.mean;
  r.variance = centered * weights.asDiagonal() * centered.transpose();
  r.variance = 0.5 * (r.variance + r.variance.transpose());
  r.locations = (shrinkage * params).colwise() + (1.0 - shrinkage) * r.mean;
  Eigen::LLT<Eigen::MatrixXd> llt(r.variance);
  if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0) {
    r.variance += kLwVarianceFloor * Eigen::MatrixXd::Identity(r.variance.rows(), r.variance.cols());
    r.floored = true;
  }
  return r;
}

Eigen::MatrixXd to_unconstrained(const ParticleParams& params) {
  const Eigen::Index m = params.w.rows();
  const Eigen::Index d = m + (params.has_v() ? 1 : 0);
  Eigen::MatrixXd phi(d, params.w.cols());
  phi.topRows(m) = params.w.array().log().matrix();
  if (params.has_v()) phi.row(m) = params.v.array().log().matrix().transpose();
  return phi;
}

ParticleParams from_unconstrained(const Eigen::MatrixXd& phi, int state_dim, bool has_v) {
  ParticleParams p;
  p.w = phi.topRows(state_dim).array().exp().matrix();
  if (has_v) p.v = phi.row(state_dim).transpose().array().exp().matrix();
  return p;
}

namespace {

void require_learning_state(const ParticleSystem& ps, bool need_suffstats, const char* who) {
  if (!ps.params) throw ConfigError(std::string(who) + ": particle system has no parameters");
  if (need_suffstats && !ps.suffstats)
    throw ConfigError(std::string(who) + ": particle system has no sufficient statistics");
}

void draw_block(const SuffStatsBlock& block, const PriorSpec& prior, ParticleParams& out, Rng& rng) {
  if (!prior.has_diagonal_w_prior())
    throw ConfigError("particle filters support only per-component inverse-gamma W priors");
  const auto& comps = prior.w_components();
  const Eigen::Index m = out.w.rows();
  for (int i = 0; i < block.size(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const InverseGamma post = inverse_gamma_posterior(comps[static_cast<std::size_t>(j)],
                                                        block.n_obs[i], block.sq_increments(j, i));
      out.w(j, i) = rng.inverse_gamma(post.shape, post.scale);
    }
    if (out.has_v()) {
      const InverseGamma post =
          inverse_gamma_posterior(*prior.v_prior, block.n_residuals[i], block.sq_residuals[i]);
      out.v[i] = rng.inverse_gamma(post.shape, post.scale);
    }
  }
}

void update_block(SuffStatsBlock& block, const Eigen::MatrixXd& states, const Eigen::MatrixXd& prev,
                  std::optional<double> y, const ModelSpec& spec) {
  const Eigen::MatrixXd inc = states - spec.G() * prev;
  block.n_obs.array() += 1.0;
  block.sq_increments += inc.cwiseAbs2();
  if (y && spec.has_observation_variance()) {
    const Eigen::VectorXd resid = (-(states.transpose() * spec.F())).array() + *y;
    block.n_residuals.array() += 1.0;
    block.sq_residuals += resid.cwiseAbs2();
  }
}

}  // namespace

ParticleSystem init_learning_particles(const PriorSpec& prior, const ModelSpec& spec,
                                       const FilterConfig& config, Rng& rng) {
  validate_prior(spec, prior);
  ParticleSystem ps = init_particles(prior, spec, config, rng);
  const int n = ps.size();
  ParticleParams params;
  params.w.resize(spec.state_dim(), n);
  if (spec.has_observation_variance()) params.v.resize(n);
  ps.suffstats = SuffStatsBlock::zeros(spec.state_dim(), n);
  draw_block(*ps.suffstats, prior, params, rng);
  ps.params = std::move(params);
  return ps;
}

void lw_jitter(Eigen::MatrixXd& locations, const Eigen::MatrixXd& variance, double bandwidth, Rng& rng) {
  if (bandwidth > 0.0) detail::add_noise_full(locations, covariance_factor(bandwidth * bandwidth * variance), rng);
}

void lw_step(ParticleSystem& ps, const ModelSpec& spec, const LwConfig& lw, double y,
             const FilterConfig& config, Rng& rng) {
  require_learning_state(ps, false, "lw_step");
  const int m = spec.state_dim();
  const bool has_v = ps.params->has_v();

  const Eigen::MatrixXd phi = to_unconstrained(*ps.params);
  const ShrinkResult shrink = lw_shrink_locations(phi, ps.weights.weights(), lw.shrinkage());
  // only V enters the likelihood, so W is not exponentiated at the locations
  ParticleParams at_locations;
  if (has_v) at_locations.v = shrink.locations.row(m).transpose().array().exp().matrix();

  const Eigen::MatrixXd mu = spec.G() * ps.states;
  const Eigen::VectorXd ll_mu = detail::log_likelihoods(spec, mu, y, at_locations);
  const WeightVector first = detail::normalize_for_step(ps.weights.log_weights + ll_mu, config, ps);
  const IndexAssignment parents = resample(config.resampler, first, rng);

  // Zero bandwidth (δ = 1) draws nothing, so the step is an APF step with
  // the parameters carried along.
  const double h = lw.bandwidth();
  Eigen::MatrixXd jittered = detail::select_columns(shrink.locations, parents);
  lw_jitter(jittered, shrink.variance, h, rng);
  ps.params = from_unconstrained(jittered, m, has_v);

  Eigen::MatrixXd next = detail::select_columns(mu, parents);
  detail::add_transition_noise(next, *ps.params, rng);
  ps.states = std::move(next);
  if (ps.suffstats) ps.suffstats.reset();

  const Eigen::VectorXd raw = detail::second_stage_log_weights(
      detail::log_likelihoods(spec, ps.states, y, *ps.params), detail::select_entries(ll_mu, parents));
  ps.weights = detail::normalize_for_step(raw, config, ps);
  ps.ess_trace.push_back(ess(ps.weights));
  ++ps.t;
}

void storvik_step(ParticleSystem& ps, const ModelSpec& spec, const PriorSpec& prior, double y,
                  const FilterConfig& config, Rng& rng, const LearningOptions& options) {
  require_learning_state(ps, true, "storvik_step");
  if (!options.freeze_parameters) draw_block(*ps.suffstats, prior, *ps.params, rng);

  Eigen::MatrixXd prev = ps.states;
  Eigen::MatrixXd next = spec.G() * ps.states;
  detail::add_transition_noise(next, *ps.params, rng);
  ps.states = std::move(next);

  const Eigen::VectorXd raw =
      ps.weights.log_weights + detail::log_likelihoods(spec, ps.states, y, *ps.params);
  ps.weights = detail::normalize_for_step(raw, config, ps);
  ps.ess_trace.push_back(ess(ps.weights));

  if (config.resample_policy.should_resample(ps.ess_trace.back(), ps.size())) {
    const IndexAssignment parents = resample(config.resampler, ps.weights, rng);
    ps.select(parents);
    prev = detail::select_columns(prev, parents);
    ps.weights = WeightVector::uniform(ps.size());
  }
  if (!options.freeze_parameters) update_block(*ps.suffstats, ps.states, prev, y, spec);
  ++ps.t;
}

void pl_step(ParticleSystem& ps, const ModelSpec& spec, const PriorSpec& prior, double y,
             const FilterConfig& config, Rng& rng, const LearningOptions& options) {
  require_learning_state(ps, true, "pl_step");

  const Eigen::MatrixXd mu = spec.G() * ps.states;
  const Eigen::VectorXd ll_mu = detail::log_likelihoods(spec, mu, y, *ps.params);
  const WeightVector first = detail::normalize_for_step(ps.weights.log_weights + ll_mu, config, ps);
  const IndexAssignment parents = resample(config.resampler, first, rng);

  const Eigen::MatrixXd prev = detail::select_columns(ps.states, parents);
  ps.select(parents);
  Eigen::MatrixXd next = detail::select_columns(mu, parents);
  detail::add_transition_noise(next, *ps.params, rng);
  ps.states = std::move(next);

  if (!options.freeze_parameters) {
    update_block(*ps.suffstats, ps.states, prev, y, spec);
    draw_block(*ps.suffstats, prior, *ps.params, rng);
  }

  const Eigen::VectorXd raw = detail::second_stage_log_weights(
      detail::log_likelihoods(spec, ps.states, y, *ps.params), detail::select_entries(ll_mu, parents));
  ps.weights = detail::normalize_for_step(raw, config, ps);
  ps.ess_trace.push_back(ess(ps.weights));
  ++ps.t;
}

void propagate_only_step(ParticleSystem& ps, const ModelSpec& spec, Rng& rng,
                         const LearningOptions& options) {
  require_learning_state(ps, false, "propagate_only_step");
  const Eigen::MatrixXd prev = ps.states;
  Eigen::MatrixXd next = spec.G() * ps.states;
  detail::add_transition_noise(next, *ps.params, rng);
  ps.states = std::move(next);
  if (ps.suffstats && !options.freeze_parameters)
    update_block(*ps.suffstats, ps.states, prev, std::nullopt, spec);
  ps.ess_trace.push_back(ess(ps.weights));
  ++ps.t;
}

}  // namespace dglm
