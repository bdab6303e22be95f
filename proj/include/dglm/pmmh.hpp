#ifndef DGLM_PMMH_HPP
#define DGLM_PMMH_HPP

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dglm/model.hpp"
#include "dglm/resampling.hpp"
#include "dglm/rng.hpp"

namespace dglm {

// Particle marginal Metropolis-Hastings over the variance parameters,
// random walk on log W_j (and log V). Used offline to produce reference
// posteriors and state trajectories.

enum class LikelihoodSource { Smc, Kalman };

std::string to_string(LikelihoodSource s);
LikelihoodSource parse_likelihood_source(std::string_view name);

struct LoglikEstimate {
  double loglik = 0.0;
  Eigen::MatrixXd filtered_means;  // m x T
};

/// SIR estimate Σ_t log Σ_i w_{t-1,i} p(y_t | θ_t,i), resampling every step.
/// Missing observations contribute 0; a collapse gives -inf.
LoglikEstimate estimate_loglik_with_means(const TimeSeries& series, const ModelSpec& spec,
                                          const ParameterSet& params, const PriorSpec& prior,
                                          int n_particles, Rng& rng,
                                          Resampler resampler = Resampler::Systematic);

double estimate_loglik(const TimeSeries& series, const ModelSpec& spec, const ParameterSet& params,
                       const PriorSpec& prior, int n_particles, Rng& rng,
                       Resampler resampler = Resampler::Systematic);

/// log u < log_target_prop − log_target_cur. A -inf proposal is always
/// rejected; a finite proposal from a -inf current point always accepted.
bool mh_accept(double log_target_prop, double log_target_cur, double u);

struct PmmhConfig {
  int n_iter = 5000;
  int n_particles = 500;
  int burn_in = 1000;
  int thin = 1;
  // Proposal covariance over the estimated log-scale coordinates. Empty
  // means 0.1² I.
  Eigen::MatrixXd step_covariance;
  ParameterSet initial;
  // Which coordinates move; fixed ones stay at their initial value.
  std::vector<bool> estimate_w;  // empty = all
  bool estimate_v = true;
  LikelihoodSource likelihood = LikelihoodSource::Smc;
  Resampler resampler = Resampler::Systematic;
  bool store_trajectories = true;

  static constexpr double kDefaultStep = 0.1;
};

struct PmmhTrace {
  std::vector<ParameterSet> draws;  // chain state after each iteration
  std::vector<double> loglik;
  std::vector<double> log_target;
  std::vector<bool> accepted;
  long accept_count = 0;
  std::vector<int> stored_iterations;            // post burn-in, thinned
  std::vector<Eigen::MatrixXd> trajectories;     // filtered means, m x T
  int burn_in = 0;
  int thin = 1;

  double acceptance_rate() const;
  std::vector<ParameterSet> posterior_draws() const;
  // Posterior mean of the stored trajectories; the reference for MSE.
  Eigen::MatrixXd reference_trajectory() const;
};

/// log π(Φ) on the log scale, including the Jacobian, for the estimated
/// coordinates: Σ α log β − lgamma α − α log σ² − β / σ².
double log_prior_unconstrained(const ParameterSet& params, const PriorSpec& prior,
                               const std::vector<bool>& estimate_w, bool estimate_v);

// Throws ConfigError on an inconsistent config.
void validate_pmmh(const PmmhConfig& cfg, const ModelSpec& spec, const PriorSpec& prior);

PmmhTrace pmmh_run(const TimeSeries& series, const ModelSpec& spec, const PriorSpec& prior,
                   const PmmhConfig& cfg, Rng& rng);

}  // namespace dglm

#endif  // DGLM_PMMH_HPP
