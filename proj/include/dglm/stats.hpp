#ifndef DGLM_STATS_HPP
#define DGLM_STATS_HPP

#include <Eigen/Core>

namespace dglm {

// Weighted summaries. Weights need not be normalized but must be
// non-negative with a positive sum.

double weighted_mean(const Eigen::Ref<const Eigen::VectorXd>& values,
                     const Eigen::Ref<const Eigen::VectorXd>& weights);

// Population (not bias-corrected) weighted variance.
double weighted_variance(const Eigen::Ref<const Eigen::VectorXd>& values,
                         const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Type-7 quantile on the weighted ECDF. Zero-weight values are dropped;
/// the k-th sorted value sits at S_k / S_{n-1}, S_k being the weight mass
/// strictly before it. Equal weights give the ordinary type-7 quantile.
double weighted_quantile(const Eigen::Ref<const Eigen::VectorXd>& values,
                         const Eigen::Ref<const Eigen::VectorXd>& weights, double p);

}  // namespace dglm

#endif  // DGLM_STATS_HPP
