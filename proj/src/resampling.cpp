#include "dglm/resampling.hpp"

#include <cmath>
#include <limits>

#include "dglm/errors.hpp"

namespace dglm {

std::string to_string(Resampler r) {
  switch (r) {
    case Resampler::Multinomial:
      return "multinomial";
    case Resampler::Stratified:
      return "stratified";
    case Resampler::Systematic:
      return "systematic";
  }
  return "?";
}

Resampler parse_resampler(std::string_view name) {
  if (name == "multinomial") return Resampler::Multinomial;
  if (name == "stratified") return Resampler::Stratified;
  if (name == "systematic") return Resampler::Systematic;
  throw ConfigError("unknown resampler '" + std::string(name) + "'");
}

WeightVector WeightVector::uniform(Eigen::Index n) {
  return {Eigen::VectorXd::Constant(n, -std::log(static_cast<double>(n))), true};
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double finite_max(const Eigen::Ref<const Eigen::VectorXd>& x) {
  double mx = kNegInf;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] > mx) mx = x[i];  // NaN compares false
  return mx;
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double mx = finite_max(x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] > kNegInf) s += std::exp(x[i] - mx);
  return mx + std::log(s);
}

WeightVector normalize_log_weights(const Eigen::Ref<const Eigen::VectorXd>& raw) {
  const double mx = finite_max(raw);
  if (!std::isfinite(mx)) throw WeightCollapse("all particle weights are zero or NaN");
  double s = 0.0;
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    if (raw[i] > kNegInf) s += std::exp(raw[i] - mx);
  const double lse = mx + std::log(s);
  WeightVector out;
  out.log_weights.resize(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    out.log_weights[i] = raw[i] > kNegInf ? raw[i] - lse : kNegInf;
  out.normalized = true;
  return out;
}

double ess(const Eigen::Ref<const Eigen::VectorXd>& log_weights) {
  const double mx = finite_max(log_weights);
  if (!std::isfinite(mx)) return 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    if (!(log_weights[i] > kNegInf)) continue;
    const double w = std::exp(log_weights[i] - mx);
    s1 += w;
    s2 += w * w;
  }
  const double n = static_cast<double>(log_weights.size());
  const double e = s1 * s1 / s2;
  return e > n ? n : (e < 1.0 ? 1.0 : e);
}

double ess(const WeightVector& w) { return ess(w.log_weights); }

IndexAssignment invert_cumulative(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                  std::span<const double> sorted_points) {
  const Eigen::Index n = weights.size();
  double total = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += weights[i];
    if (weights[i] > 0.0) last_positive = i;
  }
  if (last_positive < 0) throw WeightCollapse("resampling: no particle has positive weight");

  std::vector<double> cum(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += weights[i];
    cum[static_cast<std::size_t>(i)] = acc / total;
  }

  IndexAssignment out;
  out.reserve(sorted_points.size());
  Eigen::Index i = 0;
  for (double u : sorted_points) {
    while (i < last_positive && u >= cum[static_cast<std::size_t>(i)]) ++i;
    out.push_back(static_cast<int>(i));
  }
  return out;
}

IndexAssignment systematic_indices(const Eigen::Ref<const Eigen::VectorXd>& weights, double u0) {
  const Eigen::Index n = weights.size();
  std::vector<double> u(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    u[static_cast<std::size_t>(k)] = (u0 + static_cast<double>(k)) / static_cast<double>(n);
  return invert_cumulative(weights, u);
}

IndexAssignment stratified_indices(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                   std::span<const double> offsets) {
  const Eigen::Index n = weights.size();
  if (static_cast<Eigen::Index>(offsets.size()) != n)
    throw ConfigError("stratified_indices: need one offset per particle");
  std::vector<double> u(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    u[static_cast<std::size_t>(k)] =
        (static_cast<double>(k) + offsets[static_cast<std::size_t>(k)]) / static_cast<double>(n);
  return invert_cumulative(weights, u);
}

IndexAssignment resample_multinomial(const WeightVector& w, Rng& rng) {
  // Sorted i.i.d. uniforms from normalized exponential spacings, O(N).
  const Eigen::Index n = w.size();
  std::vector<double> u(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (auto& x : u) {
    acc += rng.exponential();
    x = acc;
  }
  const double total = acc + rng.exponential();
  for (auto& x : u) x /= total;
  return invert_cumulative(w.weights(), u);
}

IndexAssignment resample_stratified(const WeightVector& w, Rng& rng) {
  std::vector<double> offsets(static_cast<std::size_t>(w.size()));
  for (auto& x : offsets) x = rng.uniform();
  return stratified_indices(w.weights(), offsets);
}

IndexAssignment resample_systematic(const WeightVector& w, Rng& rng) {
  return systematic_indices(w.weights(), rng.uniform());
}

IndexAssignment resample(Resampler kind, const WeightVector& w, Rng& rng) {
  switch (kind) {
    case Resampler::Multinomial:
      return resample_multinomial(w, rng);
    case Resampler::Stratified:
      return resample_stratified(w, rng);
    case Resampler::Systematic:
      return resample_systematic(w, rng);
  }
  return {};
}

std::vector<int> offspring_counts(const IndexAssignment& indices, int n) {
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int i : indices) ++counts[static_cast<std::size_t>(i)];
  return counts;
}

}  // namespace dglm
