#ifndef DGLM_KALMAN_HPP
#define DGLM_KALMAN_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dglm/model.hpp"

namespace dglm {

// Exact filtering for the Normal DLM. Used as ground truth for the particle
// filters and as an exact likelihood inside PMMH.

struct KalmanState {
  Eigen::VectorXd mean;  // m_t
  Eigen::MatrixXd cov;   // C_t, kept symmetric
  double loglik = 0.0;   // log p(y_1:t | Φ)
};

KalmanState kalman_init(const PriorSpec& prior);

// One predict/update cycle; a missing y gives a prediction-only step.
// Throws ConfigError unless the family is Normal, NumericalError when the
// one-step forecast variance is not positive.
KalmanState kalman_step(const KalmanState& state, const ModelSpec& spec, const ParameterSet& params,
                        std::optional<double> y);

struct KalmanResult {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  double loglik = 0.0;
};

KalmanResult kalman_filter(const TimeSeries& series, const ModelSpec& spec,
                           const ParameterSet& params, const PriorSpec& prior);

// Log marginal likelihood only (no per-step storage).
double kalman_loglik(const TimeSeries& series, const ModelSpec& spec, const ParameterSet& params,
                     const PriorSpec& prior);

struct KalmanForecast {
  std::vector<Eigen::VectorXd> means;        // a_{t+τ}, τ = 1..k
  std::vector<Eigen::MatrixXd> covariances;  // R_{t+τ}
};

// Predict-only recursion k steps past the given state.
KalmanForecast kalman_forecast(const KalmanState& state, const ModelSpec& spec,
                               const ParameterSet& params, int k);

}  // namespace dglm

#endif  // DGLM_KALMAN_HPP
