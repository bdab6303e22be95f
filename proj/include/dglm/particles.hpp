#ifndef DGLM_PARTICLES_HPP
#define DGLM_PARTICLES_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dglm/model.hpp"
#include "dglm/resampling.hpp"

namespace dglm {

/// Per-particle sufficient statistics for the variance parameters.
///
/// sq_increments[j] accumulates (θ_t − Gθ_{t−1})_j², sq_residuals
/// accumulates (y_t − Fᵀθ_t)² over observed steps (Normal family only), and
/// cross_matrix, when tracked, the outer products of the increments.
struct SufficientStatistics {
  double n_obs = 0.0;
  double n_residuals = 0.0;
  Eigen::VectorXd sq_increments;
  double sq_residuals = 0.0;
  std::optional<Eigen::MatrixXd> cross_matrix;

  static SufficientStatistics zeros(int state_dim, bool track_cross = false);
};

// Column-per-particle storage of SufficientStatistics (no cross matrix).
struct SuffStatsBlock {
  Eigen::VectorXd n_obs;
  Eigen::VectorXd n_residuals;
  Eigen::MatrixXd sq_increments;  // m x N
  Eigen::VectorXd sq_residuals;

  static SuffStatsBlock zeros(int state_dim, int n);
  int size() const { return static_cast<int>(n_obs.size()); }
  SufficientStatistics at(int i) const;
  void set(int i, const SufficientStatistics& s);
};

// Per-particle parameter draws with diagonal W.
struct ParticleParams {
  Eigen::MatrixXd w;  // m x N state-noise variances
  Eigen::VectorXd v;  // N observation variances; empty unless Normal

  int size() const { return static_cast<int>(w.cols()); }
  bool has_v() const { return v.size() > 0; }
  ParameterSet at(int i) const;
  static ParticleParams broadcast(const ParameterSet& params, int n);
};

/// The filter's whole mutable state. Column i of every populated field
/// belongs to particle i.
struct ParticleSystem {
  Eigen::MatrixXd states;  // m x N
  WeightVector weights;
  std::optional<ParticleParams> params;
  std::optional<SuffStatsBlock> suffstats;
  long t = 0;
  std::vector<double> ess_trace;
  int collapse_resets = 0;

  int size() const { return static_cast<int>(states.cols()); }
  int state_dim() const { return static_cast<int>(states.rows()); }

  // Replaces every populated field by the selected parents.
  void select(const IndexAssignment& parents);
  // Throws ConfigError if any populated field disagrees on N_p.
  void check_consistent() const;
};

struct ResamplePolicy {
  enum class Kind { EveryStep, EssBelow };
  Kind kind = Kind::EveryStep;
  double fraction = 1.0;

  static ResamplePolicy every_step() { return {}; }
  static ResamplePolicy ess_below(double fraction) { return {Kind::EssBelow, fraction}; }
  bool should_resample(double ess, int n) const {
    return kind == Kind::EveryStep || ess < fraction * static_cast<double>(n);
  }
};

enum class CollapsePolicy { Abort, ResetUniform };

struct FilterConfig {
  int n_particles = 1000;
  Resampler resampler = Resampler::Systematic;
  ResamplePolicy resample_policy;
  std::uint64_t seed = 0;
  CollapsePolicy on_collapse = CollapsePolicy::Abort;

  void validate() const;
};

}  // namespace dglm

#endif  // DGLM_PARTICLES_HPP
