#include "dglm/rng.hpp"

#include <cmath>

namespace dglm {

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

long Rng::poisson(double rate) {
  if (!(rate > 0.0)) return 0;
  std::poisson_distribution<long> dist(rate);
  return dist(engine_);
}

long Rng::binomial(long trials, double probability) {
  if (probability <= 0.0) return 0;
  if (probability >= 1.0) return trials;
  std::binomial_distribution<long> dist(trials, probability);
  return dist(engine_);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
  return z;
}

Rng Rng::substream(std::uint64_t index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  std::mt19937_64 mixer(seq);
  return Rng(mixer());
}

}  // namespace dglm
