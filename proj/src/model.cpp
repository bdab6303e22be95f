#include "dglm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dglm/errors.hpp"

namespace dglm {

Link canonical_link(Family family) {
  switch (family) {
    case Family::Normal:
      return Link::Identity;
    case Family::Poisson:
      return Link::Log;
    case Family::Binomial:
      return Link::Logit;
  }
  return Link::Identity;
}

std::string to_string(Family family) {
  switch (family) {
    case Family::Normal:
      return "normal";
    case Family::Poisson:
      return "poisson";
    case Family::Binomial:
      return "binomial";
  }
  return "?";
}

std::string to_string(Link link) {
  switch (link) {
    case Link::Identity:
      return "identity";
    case Link::Log:
      return "log";
    case Link::Logit:
      return "logit";
  }
  return "?";
}

Structure build_structure(std::span<const Component> components) {
  if (components.empty()) throw ConfigError("build_structure: empty component list");

  std::vector<double> f;
  std::vector<Eigen::MatrixXd> blocks;
  for (const Component& c : components) {
    switch (c.kind) {
      case Component::Kind::LocallyConstant:
        f.push_back(1.0);
        blocks.push_back(Eigen::MatrixXd::Identity(1, 1));
        break;
      case Component::Kind::LocallyLinear: {
        f.push_back(1.0);
        f.push_back(0.0);
        Eigen::MatrixXd b(2, 2);
        b << 1.0, 1.0, 0.0, 1.0;
        blocks.push_back(b);
        break;
      }
      case Component::Kind::FourierSeasonal: {
        if (c.period < 2) throw ConfigError("fourier component: period must be >= 2");
        if (c.harmonics < 1) throw ConfigError("fourier component: harmonics must be >= 1");
        if (2 * c.harmonics >= c.period)
          throw ConfigError("fourier component: 2 * harmonics must be < period (aliasing)");
        const double omega = 2.0 * std::numbers::pi / c.period;
        for (int k = 1; k <= c.harmonics; ++k) {
          f.push_back(1.0);
          f.push_back(0.0);
          const double cs = std::cos(k * omega);
          const double sn = std::sin(k * omega);
          Eigen::MatrixXd b(2, 2);
          b << cs, sn, -sn, cs;
          blocks.push_back(b);
        }
        break;
      }
    }
  }

  const auto m = static_cast<Eigen::Index>(f.size());
  Structure s;
  s.F = Eigen::Map<const Eigen::VectorXd>(f.data(), m);
  s.G = Eigen::MatrixXd::Zero(m, m);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    s.G.block(offset, offset, b.rows(), b.cols()) = b;
    offset += b.rows();
  }
  return s;
}

ModelSpec::ModelSpec(Family family, Eigen::VectorXd F, Eigen::MatrixXd G, long trials)
    : family_(family),
      link_(canonical_link(family)),
      F_(std::move(F)),
      G_(std::move(G)),
      trials_(family == Family::Binomial ? trials : 1) {
  if (F_.size() == 0) throw ConfigError("model: state dimension must be positive");
  if (G_.rows() != F_.size() || G_.cols() != F_.size())
    throw ConfigError("model: G must be m x m with m = length(F)");
  if (!F_.allFinite() || !G_.allFinite()) throw ConfigError("model: F and G must be finite");
  if (family == Family::Binomial && trials < 1)
    throw ConfigError("model: binomial trial count must be positive");
}

bool ParameterSet::is_diagonal() const {
  const Eigen::MatrixXd off = W - Eigen::MatrixXd(W.diagonal().asDiagonal());
  return off.cwiseAbs().maxCoeff() == 0.0;
}

namespace {

bool is_symmetric_psd(const Eigen::MatrixXd& M, double tol = 1e-10) {
  if (M.rows() != M.cols()) return false;
  if (!M.allFinite()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

bool is_symmetric_pd(const Eigen::MatrixXd& M) {
  if (!is_symmetric_psd(M)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  return llt.info() == Eigen::Success;
}

}  // namespace

void validate_parameters(const ModelSpec& spec, const ParameterSet& params, bool allow_zero_v) {
  const int m = spec.state_dim();
  if (params.W.rows() != m || params.W.cols() != m)
    throw ConfigError("parameters: W must be " + std::to_string(m) + "x" + std::to_string(m));
  if (!is_symmetric_psd(params.W)) throw ConfigError("parameters: W must be symmetric PSD");
  if (spec.has_observation_variance()) {
    if (!params.V) throw ConfigError("parameters: V is required for the normal family");
    const double v = *params.V;
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero_v && v == 0.0))
      throw ConfigError("parameters: V must be > 0");
  } else if (params.V) {
    throw ConfigError("parameters: V only applies to the normal family");
  }
}

void validate_prior(const ModelSpec& spec, const PriorSpec& prior) {
  const int m = spec.state_dim();
  if (prior.m0.size() != m) throw ConfigError("prior: m0 must have length m");
  if (prior.C0.rows() != m || prior.C0.cols() != m) throw ConfigError("prior: C0 must be m x m");
  if (!is_symmetric_psd(prior.C0)) throw ConfigError("prior: C0 must be symmetric PSD");
  auto check_ig = [](const InverseGamma& ig, const char* what) {
    if (!(ig.shape > 0.0) || !(ig.scale > 0.0))
      throw ConfigError(std::string("prior: ") + what + " inverse-gamma hyperparameters must be > 0");
  };
  if (spec.has_observation_variance()) {
    if (!prior.v_prior) throw ConfigError("prior: V prior required for the normal family");
    check_ig(*prior.v_prior, "V");
  }
  if (prior.has_diagonal_w_prior()) {
    const auto& w = prior.w_components();
    if (static_cast<int>(w.size()) != m) throw ConfigError("prior: need one W prior per state component");
    for (const auto& ig : w) check_ig(ig, "W");
  } else {
    const auto& iw = std::get<InverseWishart>(prior.w_prior);
    if (!(iw.dof > 0.0)) throw ConfigError("prior: inverse-Wishart dof must be > 0");
    if (iw.scale.rows() != m || iw.scale.cols() != m || !is_symmetric_pd(iw.scale))
      throw ConfigError("prior: inverse-Wishart scale must be symmetric PD m x m");
  }
}

TimeSeries::TimeSeries(std::vector<Observation> observations) {
  observations_.reserve(observations.size());
  for (const auto& o : observations) push_back(o.t, o.y);
}

void TimeSeries::push_back(long t, std::optional<double> y) {
  if (!observations_.empty() && t <= observations_.back().t)
    throw ConfigError("time series: indices must be strictly increasing (t=" + std::to_string(t) + ")");
  observations_.push_back({t, y});
}

std::size_t TimeSeries::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(observations_.begin(), observations_.end(), [](const auto& o) { return !o.y; }));
}

void TimeSeries::validate_for(const ModelSpec& spec) const {
  for (const auto& o : observations_) {
    if (!o.y) continue;
    const double y = *o.y;
    if (!std::isfinite(y)) throw ConfigError("time series: non-finite value at t=" + std::to_string(o.t));
    if (spec.family() == Family::Normal) continue;
    if (y != std::floor(y) || y < 0.0)
      throw ConfigError("time series: count value must be a non-negative integer at t=" +
                        std::to_string(o.t));
    if (spec.family() == Family::Binomial && y > static_cast<double>(spec.trials()))
      throw ConfigError("time series: binomial value exceeds trial count at t=" + std::to_string(o.t));
  }
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd off = cov - Eigen::MatrixXd(cov.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

double inverse_logit(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double log_choose(long n, double k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(static_cast<double>(n) - k + 1.0);
}

}  // namespace

double log_density_eta(Family family, long trials, double eta, double v, double y) {
  switch (family) {
    case Family::Normal: {
      const double r = y - eta;
      return -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * r * r / v;
    }
    case Family::Poisson: {
      const double e = std::clamp(eta, -kLinkClamp, kLinkClamp);
      return y * e - std::exp(e) - std::lgamma(y + 1.0);
    }
    case Family::Binomial: {
      const double e = std::clamp(eta, -kLinkClamp, kLinkClamp);
      return log_choose(trials, y) + y * e - static_cast<double>(trials) * softplus(e);
    }
  }
  return 0.0;
}

double observation_logdensity(const ModelSpec& spec, const ParameterSet& params,
                              const Eigen::VectorXd& theta, double y) {
  if (theta.size() != spec.state_dim())
    throw ConfigError("observation_logdensity: state has wrong dimension");
  if (!theta.allFinite()) throw NumericalError("observation_logdensity: non-finite state");
  const double eta = spec.F().dot(theta);
  return log_density_eta(spec.family(), spec.trials(), eta, params.V.value_or(1.0), y);
}

double sample_observation(Family family, long trials, double eta, double v, Rng& rng) {
  switch (family) {
    case Family::Normal:
      return eta + std::sqrt(v) * rng.normal();
    case Family::Poisson:
      return static_cast<double>(rng.poisson(std::exp(std::clamp(eta, -kLinkClamp, kLinkClamp))));
    case Family::Binomial:
      return static_cast<double>(
          rng.binomial(trials, inverse_logit(std::clamp(eta, -kLinkClamp, kLinkClamp))));
  }
  return 0.0;
}

Eigen::VectorXd propagate_state(const ModelSpec& spec, const ParameterSet& params,
                                const Eigen::VectorXd& theta_prev, Rng& rng) {
  if (theta_prev.size() != spec.state_dim())
    throw ConfigError("propagate_state: state has wrong dimension");
  const Eigen::MatrixXd L = covariance_factor(params.W);
  return spec.G() * theta_prev + L * rng.normal_vector(spec.state_dim());
}

Simulation simulate(const ModelSpec& spec, const ParameterSet& params, const PriorSpec& prior,
                    int length, Rng& rng) {
  if (length < 1) throw ConfigError("simulate: length must be >= 1");
  validate_parameters(spec, params, /*allow_zero_v=*/true);
  const int m = spec.state_dim();
  if (prior.m0.size() != m || prior.C0.rows() != m || prior.C0.cols() != m)
    throw ConfigError("simulate: prior dimensions do not match the model");

  const Eigen::MatrixXd L0 = covariance_factor(prior.C0);
  const Eigen::MatrixXd LW = covariance_factor(params.W);
  const double v = params.V.value_or(0.0);

  Simulation sim;
  sim.states.resize(m, length + 1);
  sim.states.col(0) = prior.m0 + L0 * rng.normal_vector(m);
  for (int t = 1; t <= length; ++t) {
    sim.states.col(t) = spec.G() * sim.states.col(t - 1) + LW * rng.normal_vector(m);
    const double eta = spec.F().dot(sim.states.col(t));
    sim.series.push_back(t, sample_observation(spec.family(), spec.trials(), eta, v, rng));
  }
  return sim;
}

}  // namespace dglm
