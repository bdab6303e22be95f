#include "dglm/stats.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "dglm/errors.hpp"

namespace dglm {

namespace {

double checked_total(const Eigen::Ref<const Eigen::VectorXd>& values,
                     const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (values.size() != weights.size()) throw ConfigError("weighted summary: size mismatch");
  if (values.size() == 0) throw ConfigError("weighted summary: no values");
  if (weights.minCoeff() < 0.0) throw ConfigError("weighted summary: negative weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw ConfigError("weighted summary: weights sum to zero");
  return total;
}

}  // namespace

double weighted_mean(const Eigen::Ref<const Eigen::VectorXd>& values,
                     const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const double total = checked_total(values, weights);
  return values.dot(weights) / total;
}

double weighted_variance(const Eigen::Ref<const Eigen::VectorXd>& values,
                         const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const double total = checked_total(values, weights);
  const double mean = values.dot(weights) / total;
  return (values.array() - mean).square().matrix().dot(weights) / total;
}

double weighted_quantile(const Eigen::Ref<const Eigen::VectorXd>& values,
                         const Eigen::Ref<const Eigen::VectorXd>& weights, double p) {
  checked_total(values, weights);
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("weighted_quantile: p must lie in [0, 1]");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (weights[i] > 0.0) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  const std::size_t n = idx.size();
  if (n == 1) return values[idx[0]];

  std::vector<double> before(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) before[k] = before[k - 1] + weights[idx[k - 1]];
  const double span = before[n - 1];
  const double target = p * span;
  // First k with before[k] >= target; interpolate on [k-1, k].
  const auto it = std::lower_bound(before.begin(), before.end(), target);
  const auto k = static_cast<std::size_t>(it - before.begin());
  if (k == 0) return values[idx[0]];
  if (k >= n) return values[idx[n - 1]];
  const double lo = before[k - 1], hi = before[k];
  const double frac = hi > lo ? (target - lo) / (hi - lo) : 1.0;
  return values[idx[k - 1]] + frac * (values[idx[k]] - values[idx[k - 1]]);
}

}  // namespace dglm
