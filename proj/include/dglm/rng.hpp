#ifndef DGLM_RNG_HPP
#define DGLM_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace dglm {

// Seeded random stream. Every stochastic operation takes one of these
// explicitly; nothing in the library touches global RNG state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // U[0, 1)
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  double exponential() { return exponential_(engine_); }
  // Gamma(shape, 1)
  double gamma(double shape);
  // Inverse gamma with density proportional to x^{-shape-1} exp(-scale / x).
  double inverse_gamma(double shape, double scale) { return scale / gamma(shape); }
  long poisson(double rate);
  long binomial(long trials, double probability);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  // Independent stream derived from this stream's seed and an index.
  Rng substream(std::uint64_t index) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::normal_distribution<double> normal_;
  std::exponential_distribution<double> exponential_;
};

}  // namespace dglm

#endif  // DGLM_RNG_HPP
