#include "dglm/kalman.hpp"

#include <cmath>
#include <numbers>

#include "dglm/errors.hpp"

namespace dglm {

KalmanState kalman_init(const PriorSpec& prior) { return {prior.m0, prior.C0, 0.0}; }

KalmanState kalman_step(const KalmanState& state, const ModelSpec& spec, const ParameterSet& params,
                        std::optional<double> y) {
  if (spec.family() != Family::Normal) throw ConfigError("kalman_step: requires the normal family");
  const Eigen::MatrixXd& G = spec.G();
  const Eigen::VectorXd& F = spec.F();

  KalmanState next;
  next.loglik = state.loglik;
  Eigen::VectorXd a = G * state.mean;
  Eigen::MatrixXd R = G * state.cov * G.transpose() + params.W;
  R = 0.5 * (R + R.transpose());

  if (!y) {
    next.mean = std::move(a);
    next.cov = std::move(R);
    return next;
  }

  const Eigen::VectorXd RF = R * F;
  const double f = F.dot(a);
  const double q = F.dot(RF) + params.V.value_or(0.0);
  if (!(q > 0.0) || !std::isfinite(q))
    throw NumericalError("kalman_step: one-step forecast variance is not positive");

  const double e = *y - f;
  next.mean = a + RF * (e / q);
  next.cov = R - RF * RF.transpose() / q;
  next.cov = 0.5 * (next.cov + next.cov.transpose());
  next.loglik += -0.5 * (std::log(2.0 * std::numbers::pi * q) + e * e / q);
  return next;
}

KalmanResult kalman_filter(const TimeSeries& series, const ModelSpec& spec,
                           const ParameterSet& params, const PriorSpec& prior) {
  KalmanResult out;
  out.means.reserve(series.size());
  out.covariances.reserve(series.size());
  KalmanState s = kalman_init(prior);
  for (const auto& obs : series) {
    s = kalman_step(s, spec, params, obs.y);
    out.means.push_back(s.mean);
    out.covariances.push_back(s.cov);
  }
  out.loglik = s.loglik;
  return out;
}

double kalman_loglik(const TimeSeries& series, const ModelSpec& spec, const ParameterSet& params,
                     const PriorSpec& prior) {
  KalmanState s = kalman_init(prior);
  for (const auto& obs : series) s = kalman_step(s, spec, params, obs.y);
  return s.loglik;
}

KalmanForecast kalman_forecast(const KalmanState& state, const ModelSpec& spec,
                               const ParameterSet& params, int k) {
  KalmanForecast out;
  KalmanState s = state;
  for (int tau = 1; tau <= k; ++tau) {
    s = kalman_step(s, spec, params, std::nullopt);
    out.means.push_back(s.mean);
    out.covariances.push_back(s.cov);
  }
  return out;
}

}  // namespace dglm
