// Shared per-particle kernels for the filter implementations. The known-
// parameter and parameter-learning filters go through the same arithmetic
// and RNG consumption order, so a learning filter with frozen parameters
// reproduces its known-parameter counterpart exactly.
#ifndef DGLM_SRC_KERNELS_HPP
#define DGLM_SRC_KERNELS_HPP

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "dglm/errors.hpp"
#include "dglm/model.hpp"
#include "dglm/particles.hpp"
#include "dglm/resampling.hpp"
#include "dglm/rng.hpp"

namespace dglm::detail {

inline void add_noise_diag(Eigen::MatrixXd& states, const Eigen::VectorXd& sd, Rng& rng) {
  const Eigen::Index m = states.rows();
  for (Eigen::Index i = 0; i < states.cols(); ++i)
    for (Eigen::Index j = 0; j < m; ++j) states(j, i) += sd[j] * rng.normal();
}

inline void add_noise_per_particle(Eigen::MatrixXd& states, const Eigen::MatrixXd& sd, Rng& rng) {
  const Eigen::Index m = states.rows();
  for (Eigen::Index i = 0; i < states.cols(); ++i)
    for (Eigen::Index j = 0; j < m; ++j) states(j, i) += sd(j, i) * rng.normal();
}

inline void add_noise_full(Eigen::MatrixXd& states, const Eigen::MatrixXd& L, Rng& rng) {
  // one block product; the draw order matches a column-by-column loop
  Eigen::MatrixXd z(states.rows(), states.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  states.noalias() += L * z;
}

// Adds N(0, W) noise for a parameter set shared by all particles.
inline void add_transition_noise(Eigen::MatrixXd& states, const ParameterSet& params, Rng& rng) {
  if (params.is_diagonal())
    add_noise_diag(states, params.W.diagonal().cwiseMax(0.0).cwiseSqrt(), rng);
  else
    add_noise_full(states, covariance_factor(params.W), rng);
}

inline void add_transition_noise(Eigen::MatrixXd& states, const ParticleParams& params, Rng& rng) {
  add_noise_per_particle(states, params.w.cwiseMax(0.0).cwiseSqrt(), rng);
}

// log p(y | θ_i) for every column; non-finite linear predictors map to -inf.
inline Eigen::VectorXd log_likelihoods(const ModelSpec& spec, const Eigen::MatrixXd& states,
                                       double y, double v) {
  const Eigen::VectorXd eta = states.transpose() * spec.F();
  Eigen::VectorXd out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    out[i] = std::isfinite(eta[i]) ? log_density_eta(spec.family(), spec.trials(), eta[i], v, y)
                                   : -std::numeric_limits<double>::infinity();
  return out;
}

inline Eigen::VectorXd log_likelihoods(const ModelSpec& spec, const Eigen::MatrixXd& states,
                                       double y, const ParameterSet& params) {
  return log_likelihoods(spec, states, y, params.V.value_or(1.0));
}

inline Eigen::VectorXd log_likelihoods(const ModelSpec& spec, const Eigen::MatrixXd& states,
                                       double y, const ParticleParams& params) {
  if (!params.has_v()) return log_likelihoods(spec, states, y, 1.0);
  const Eigen::VectorXd eta = states.transpose() * spec.F();
  Eigen::VectorXd out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    out[i] = std::isfinite(eta[i])
                 ? log_density_eta(spec.family(), spec.trials(), eta[i], params.v[i], y)
                 : -std::numeric_limits<double>::infinity();
  return out;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const IndexAssignment& idx) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(idx[k]);
  return out;
}

inline Eigen::VectorXd select_entries(const Eigen::VectorXd& x, const IndexAssignment& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = x[idx[k]];
  return out;
}

// Second-stage log weights log p(y|θ) - log p(y|μ_parent). A non-finite
// denominator only occurs after a collapse reset and is treated as 0.
inline Eigen::VectorXd second_stage_log_weights(const Eigen::VectorXd& ll,
                                                const Eigen::VectorXd& ll_parent) {
  Eigen::VectorXd out(ll.size());
  for (Eigen::Index i = 0; i < ll.size(); ++i)
    out[i] = ll[i] - (std::isfinite(ll_parent[i]) ? ll_parent[i] : 0.0);
  return out;
}

// Normalizes, applying the configured collapse policy. Abort rethrows with
// the time index of the step being assimilated.
inline WeightVector normalize_for_step(const Eigen::VectorXd& raw, const FilterConfig& config,
                                       ParticleSystem& ps) {
  try {
    return normalize_log_weights(raw);
  } catch (const WeightCollapse&) {
    if (config.on_collapse == CollapsePolicy::Abort)
      throw WeightCollapse("all particle weights collapsed at step " + std::to_string(ps.t + 1),
                           ps.t + 1);
    ++ps.collapse_resets;
    return WeightVector::uniform(raw.size());
  }
}

}  // namespace dglm::detail

#endif  // DGLM_SRC_KERNELS_HPP
