#ifndef DGLM_FORECAST_HPP
#define DGLM_FORECAST_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dglm/model.hpp"
#include "dglm/particles.hpp"
#include "dglm/rng.hpp"

namespace dglm {

// k-step forecasts from a particle cloud. States move under the prior
// transition only; nothing is reweighted or resampled, and the source
// particle system is left untouched.

struct ForecastBand {
  int horizon = 0;
  std::vector<Eigen::MatrixXd> states;        // per τ = 1..k, m x N
  std::vector<Eigen::VectorXd> observations;  // per τ, N draws; empty until filled
  Eigen::VectorXd weights;                    // normalized, carried from time t

  // Exactly one is set: a shared Φ or per-particle draws.
  std::optional<ParameterSet> fixed_params;
  std::optional<ParticleParams> particle_params;
};

/// Uses the particle system's own per-particle Φ when it has them,
/// otherwise `params`.
ForecastBand forecast_states(const ParticleSystem& ps, const ModelSpec& spec,
                             const std::optional<ParameterSet>& params, int k, Rng& rng);

// One y draw per particle per horizon, under that particle's Φ.
void forecast_observations(ForecastBand& band, const ModelSpec& spec, Rng& rng);

struct BandSummary {
  Eigen::MatrixXd state_mean, state_lo, state_hi;  // k x m
  Eigen::VectorXd obs_mean, obs_lo, obs_hi;        // k; empty without observations
};

BandSummary summarize_band(const ForecastBand& band, double level = 0.95);

/// Componentwise (1/T) Σ_t (estimate_t − reference_t)². Columns are time.
Eigen::VectorXd state_mse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& reference);

/// Mean of (y_t − ŷ_t)² over steps where both are present.
double one_step_forecast_mse(const TimeSeries& series,
                             const std::vector<std::optional<double>>& predicted);

}  // namespace dglm

#endif  // DGLM_FORECAST_HPP
