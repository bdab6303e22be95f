#ifndef DGLM_MODEL_HPP
#define DGLM_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dglm/rng.hpp"

namespace dglm {

enum class Family { Normal, Poisson, Binomial };
enum class Link { Identity, Log, Logit };

// Each family has exactly one canonical link.
Link canonical_link(Family family);
std::string to_string(Family family);
std::string to_string(Link link);

// Linear predictors are clamped to this range before exp/logistic so a
// diverging particle yields a tiny weight instead of NaN.
inline constexpr double kLinkClamp = 300.0;

/// A structural building block of F and G.
///
/// LocallyConstant contributes a level, LocallyLinear a level plus trend,
/// and FourierSeasonal one rotation block per harmonic of the period.
struct Component {
  enum class Kind { LocallyConstant, LocallyLinear, FourierSeasonal };

  Kind kind = Kind::LocallyConstant;
  int period = 0;
  int harmonics = 0;

  static Component locally_constant() { return {Kind::LocallyConstant, 0, 0}; }
  static Component locally_linear() { return {Kind::LocallyLinear, 0, 0}; }
  static Component fourier(int period, int harmonics = 1) {
    return {Kind::FourierSeasonal, period, harmonics};
  }
};

struct Structure {
  Eigen::VectorXd F;
  Eigen::MatrixXd G;
  int state_dim() const { return static_cast<int>(F.size()); }
};

/// Assembles block-diagonal G and the concatenated observation vector F.
/// Throws ConfigError for an empty list or an aliased harmonic (2h >= p).
Structure build_structure(std::span<const Component> components);

/// A DGLM instance: observation family (with its canonical link) plus the
/// static observation vector F and system matrix G. Immutable.
class ModelSpec {
 public:
  ModelSpec(Family family, Eigen::VectorXd F, Eigen::MatrixXd G, long trials = 1);
  ModelSpec(Family family, const Structure& structure, long trials = 1)
      : ModelSpec(family, structure.F, structure.G, trials) {}

  Family family() const { return family_; }
  Link link() const { return link_; }
  const Eigen::VectorXd& F() const { return F_; }
  const Eigen::MatrixXd& G() const { return G_; }
  int state_dim() const { return static_cast<int>(F_.size()); }
  // Binomial trial count; 1 for the other families.
  long trials() const { return trials_; }
  bool has_observation_variance() const { return family_ == Family::Normal; }

 private:
  Family family_;
  Link link_;
  Eigen::VectorXd F_;
  Eigen::MatrixXd G_;
  long trials_;
};

// Static parameters {W, V}. V is present only for the Normal family.
struct ParameterSet {
  Eigen::MatrixXd W;
  std::optional<double> V;

  static ParameterSet diagonal(const Eigen::VectorXd& w, std::optional<double> v = std::nullopt) {
    return {w.asDiagonal().toDenseMatrix(), v};
  }
  bool is_diagonal() const;
};

// Throws ConfigError when W is not symmetric PSD of size m, or V is missing,
// non-positive (zero allowed only when allow_zero_v), or present for a
// family without observation variance.
void validate_parameters(const ModelSpec& spec, const ParameterSet& params,
                         bool allow_zero_v = false);

struct InverseGamma {
  double shape = 1.0;
  double scale = 1.0;
};

struct InverseWishart {
  double dof = 0.0;
  Eigen::MatrixXd scale;
};

struct PriorSpec {
  Eigen::VectorXd m0;
  Eigen::MatrixXd C0;
  std::optional<InverseGamma> v_prior;
  // Per-diagonal-component inverse gammas, or an inverse Wishart on full W.
  std::variant<std::vector<InverseGamma>, InverseWishart> w_prior;

  bool has_diagonal_w_prior() const {
    return std::holds_alternative<std::vector<InverseGamma>>(w_prior);
  }
  const std::vector<InverseGamma>& w_components() const {
    return std::get<std::vector<InverseGamma>>(w_prior);
  }
};

void validate_prior(const ModelSpec& spec, const PriorSpec& prior);

struct Observation {
  long t = 0;
  std::optional<double> y;
};

// Univariate series with explicit missing values and strictly increasing
// time indices.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(std::vector<Observation> observations);

  void push_back(long t, std::optional<double> y);
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  const std::vector<Observation>& observations() const { return observations_; }
  auto begin() const { return observations_.begin(); }
  auto end() const { return observations_.end(); }
  std::size_t missing_count() const;

  // Rejects values outside the family's support.
  void validate_for(const ModelSpec& spec) const;

 private:
  std::vector<Observation> observations_;
};

/// Lower factor L with L Lᵀ = cov; handles PSD (including zero) matrices.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

/// log f(y | eta) for a linear predictor eta = Fᵀθ.
double log_density_eta(Family family, long trials, double eta, double v, double y);
double inverse_logit(double eta);

/// log f(y | θ, Φ). Throws NumericalError for non-finite θ.
double observation_logdensity(const ModelSpec& spec, const ParameterSet& params,
                              const Eigen::VectorXd& theta, double y);

double sample_observation(Family family, long trials, double eta, double v, Rng& rng);

/// θ_next ~ N(G θ_prev, W).
Eigen::VectorXd propagate_state(const ModelSpec& spec, const ParameterSet& params,
                                const Eigen::VectorXd& theta_prev, Rng& rng);

struct Simulation {
  Eigen::MatrixXd states;  // m x (T + 1), column 0 is θ₀
  TimeSeries series;       // t = 1..T
};

Simulation simulate(const ModelSpec& spec, const ParameterSet& params, const PriorSpec& prior,
                    int length, Rng& rng);

}  // namespace dglm

#endif  // DGLM_MODEL_HPP
