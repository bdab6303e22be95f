#ifndef DGLM_FILTERS_HPP
#define DGLM_FILTERS_HPP

#include "dglm/model.hpp"
#include "dglm/particles.hpp"
#include "dglm/rng.hpp"

namespace dglm {

// Known-parameter particle filters. All steps mutate the particle system in
// place, use the state transition as proposal, and keep weights in log
// space. ess_trace receives the ESS of the step's importance weights,
// measured before any resampling reset.

/// θ₀ ~ N(m₀, C₀), uniform weights.
ParticleSystem init_particles(const PriorSpec& prior, const ModelSpec& spec,
                              const FilterConfig& config, Rng& rng);

/// Propagate, multiply weights by p(y | θ), normalize. Never resamples.
void sis_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params, double y,
              const FilterConfig& config, Rng& rng);

/// sis_step, then resample per the config policy and reset to uniform.
void sir_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params, double y,
              const FilterConfig& config, Rng& rng);

/// Auxiliary particle filter with μ = Gθ as the first-stage
/// characterization. Always resamples on the first-stage weights.
void apf_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params, double y,
              const FilterConfig& config, Rng& rng);

/// Missing observation: propagate only, weights untouched.
void propagate_only_step(ParticleSystem& ps, const ModelSpec& spec, const ParameterSet& params,
                         Rng& rng);

// Weighted mean of the particle states.
Eigen::VectorXd weighted_state_mean(const ParticleSystem& ps);

}  // namespace dglm

#endif  // DGLM_FILTERS_HPP
