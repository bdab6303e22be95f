#ifndef DGLM_RESAMPLING_HPP
#define DGLM_RESAMPLING_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dglm/rng.hpp"

namespace dglm {

enum class Resampler { Multinomial, Stratified, Systematic };

std::string to_string(Resampler r);
// Accepts "multinomial", "stratified", "systematic"; throws ConfigError otherwise.
Resampler parse_resampler(std::string_view name);

// Log-space particle weights. After normalization exp(log_weights) sums to 1
// and every entry is finite or -inf.
struct WeightVector {
  Eigen::VectorXd log_weights;
  bool normalized = false;

  Eigen::Index size() const { return log_weights.size(); }
  Eigen::VectorXd weights() const { return log_weights.array().exp().matrix(); }

  static WeightVector uniform(Eigen::Index n);
};

// Parent index per offspring slot, length N_p.
using IndexAssignment = std::vector<int>;

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Max-shifted log-sum-exp normalization. Throws WeightCollapse when no
/// entry is finite (all -inf or NaN). NaN entries are treated as -inf.
WeightVector normalize_log_weights(const Eigen::Ref<const Eigen::VectorXd>& raw);

/// 1 / Σ w², evaluated as (Σ ŵ)² / Σ ŵ² on max-shifted weights so the
/// uniform and single-atom cases come out exact.
double ess(const WeightVector& w);
double ess(const Eigen::Ref<const Eigen::VectorXd>& log_weights);

/// Maps sorted points in [0, 1) to particle indices by a single linear
/// merge against the cumulative weights. Cells are left-closed,
/// [c_{i-1}, c_i), so zero-weight particles are never selected.
IndexAssignment invert_cumulative(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                  std::span<const double> sorted_points);

IndexAssignment resample_multinomial(const WeightVector& w, Rng& rng);
IndexAssignment resample_stratified(const WeightVector& w, Rng& rng);
IndexAssignment resample_systematic(const WeightVector& w, Rng& rng);
IndexAssignment resample(Resampler kind, const WeightVector& w, Rng& rng);

// Deterministic cores, exposed for enumeration tests.
// Systematic: u_k = (u0 + k) / N for u0 in [0, 1).
IndexAssignment systematic_indices(const Eigen::Ref<const Eigen::VectorXd>& weights, double u0);
// Stratified: u_k = (k + offsets[k]) / N with offsets in [0, 1).
IndexAssignment stratified_indices(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                   std::span<const double> offsets);

// Offspring count per particle.
std::vector<int> offspring_counts(const IndexAssignment& indices, int n);

}  // namespace dglm

#endif  // DGLM_RESAMPLING_HPP
