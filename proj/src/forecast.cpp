#include "dglm/forecast.hpp"

#include "dglm/errors.hpp"
#include "dglm/stats.hpp"
#include "kernels.hpp"

namespace dglm {

ForecastBand forecast_states(const ParticleSystem& ps, const ModelSpec& spec,
                             const std::optional<ParameterSet>& params, int k, Rng& rng) {
  if (k < 1) throw ConfigError("forecast: horizon must be >= 1");
  if (!ps.params && !params) throw ConfigError("forecast: no parameters for the state transition");
  ForecastBand band;
  band.horizon = k;
  band.weights = ps.weights.weights();
  if (ps.params)
    band.particle_params = ps.params;
  else
    band.fixed_params = params;

  Eigen::MatrixXd cur = ps.states;
  for (int tau = 0; tau < k; ++tau) {
    Eigen::MatrixXd next = spec.G() * cur;
    if (band.particle_params)
      detail::add_transition_noise(next, *band.particle_params, rng);
    else
      detail::add_transition_noise(next, *band.fixed_params, rng);
    band.states.push_back(next);
    cur = std::move(next);
  }
  return band;
}

void forecast_observations(ForecastBand& band, const ModelSpec& spec, Rng& rng) {
  band.observations.clear();
  for (const auto& cloud : band.states) {
    const Eigen::VectorXd eta = cloud.transpose() * spec.F();
    Eigen::VectorXd y(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      double v = 0.0;
      if (spec.has_observation_variance()) {
        if (band.particle_params)
          v = band.particle_params->v[i];
        else
          v = band.fixed_params->V.value_or(0.0);
      }
      y[i] = sample_observation(spec.family(), spec.trials(), eta[i], v, rng);
    }
    band.observations.push_back(std::move(y));
  }
}

BandSummary summarize_band(const ForecastBand& band, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("band level must lie in (0, 1)");
  const double plo = 0.5 * (1.0 - level), phi = 1.0 - plo;
  const auto k = static_cast<Eigen::Index>(band.states.size());
  const Eigen::Index m = k > 0 ? band.states[0].rows() : 0;
  BandSummary s;
  s.state_mean.resize(k, m);
  s.state_lo.resize(k, m);
  s.state_hi.resize(k, m);
  for (Eigen::Index t = 0; t < k; ++t) {
    const auto& cloud = band.states[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::VectorXd row = cloud.row(j).transpose();
      s.state_mean(t, j) = weighted_mean(row, band.weights);
      s.state_lo(t, j) = weighted_quantile(row, band.weights, plo);
      s.state_hi(t, j) = weighted_quantile(row, band.weights, phi);
    }
  }
  if (!band.observations.empty()) {
    s.obs_mean.resize(k);
    s.obs_lo.resize(k);
    s.obs_hi.resize(k);
    for (Eigen::Index t = 0; t < k; ++t) {
      const auto& y = band.observations[static_cast<std::size_t>(t)];
      s.obs_mean[t] = weighted_mean(y, band.weights);
      s.obs_lo[t] = weighted_quantile(y, band.weights, plo);
      s.obs_hi[t] = weighted_quantile(y, band.weights, phi);
    }
  }
  return s;
}

Eigen::VectorXd state_mse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
    throw ConfigError("state_mse: estimate and reference differ in shape");
  if (estimate.cols() == 0) throw ConfigError("state_mse: empty sequences");
  return (estimate - reference).array().square().rowwise().mean().matrix();
}

double one_step_forecast_mse(const TimeSeries& series,
                             const std::vector<std::optional<double>>& predicted) {
  if (predicted.size() != series.size())
    throw ConfigError("one_step_forecast_mse: predictions not aligned with the series");
  double sum = 0.0;
  long count = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!series[t].y || !predicted[t]) continue;
    const double d = *series[t].y - *predicted[t];
    sum += d * d;
    ++count;
  }
  if (count == 0) throw ConfigError("one_step_forecast_mse: no observed, predicted pairs");
  return sum / static_cast<double>(count);
}

}  // namespace dglm
