#ifndef DGLM_LEARNING_HPP
#define DGLM_LEARNING_HPP

#include <optional>

#include <Eigen/Core>

#include "dglm/filters.hpp"
#include "dglm/model.hpp"
#include "dglm/particles.hpp"
#include "dglm/rng.hpp"

namespace dglm {

// Joint state and parameter filters: Liu-West kernel shrinkage, Storvik,
// and Particle Learning. Parameters are the diagonal of W plus V for the
// Normal family.

// ---- sufficient statistics -------------------------------------------

/// Adds the transition θ_prev -> θ_t (and the residual of y, if observed
/// and the family is Normal).
SufficientStatistics update_suffstats(const SufficientStatistics& s, const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& theta_prev, std::optional<double> y,
                                      const ModelSpec& spec);

// Semi-conjugate update IG(α₀ + n/2, β₀ + ½ Σ sq).
InverseGamma inverse_gamma_posterior(const InverseGamma& prior, double n, double sum_of_squares);

/// Draws Φ ~ p(Φ | s). W components first (or one inverse-Wishart draw),
/// then V when the prior carries a V component.
ParameterSet draw_parameters(const SufficientStatistics& s, const PriorSpec& prior, Rng& rng);

// Inverse-Wishart with density ∝ |X|^{-(dof+m+1)/2} exp(-tr(scale X⁻¹)/2).
Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng);

// ---- Liu-West ---------------------------------------------------------

/// Shrinkage a = (3δ − 1) / (2δ) and kernel bandwidth h = √(1 − a²).
struct LwConfig {
  double delta = 0.98;

  double shrinkage() const { return (3.0 * delta - 1.0) / (2.0 * delta); }
  double bandwidth() const;
  // Throws ConfigError unless δ ∈ [1/3, 1] (a ∈ [0, 1]).
  void validate() const;
};

struct ShrinkResult {
  Eigen::MatrixXd locations;  // d x N, m_i = a Φ_i + (1 − a) Φ̄
  Eigen::VectorXd mean;       // Φ̄ (weighted)
  Eigen::MatrixXd variance;   // V_t (weighted), floored when singular
  bool floored = false;
};

// Floor added to a singular V_t so the kernel stays proper after collapse.
inline constexpr double kLwVarianceFloor = 1e-12;

ShrinkResult lw_shrink_locations(const Eigen::MatrixXd& params, const Eigen::VectorXd& weights,
                                 double shrinkage);

// Adds N(0, h² V_t) to every column; a no-op (and no draws) at h = 0.
void lw_jitter(Eigen::MatrixXd& locations, const Eigen::MatrixXd& variance, double bandwidth, Rng& rng);

// log-variance coordinates: rows are log W_1..log W_m, then log V.
Eigen::MatrixXd to_unconstrained(const ParticleParams& params);
ParticleParams from_unconstrained(const Eigen::MatrixXd& phi, int state_dim, bool has_v);

// ---- filters ----------------------------------------------------------

struct LearningOptions {
  // Keep every particle's Φ and sufficient statistics fixed. Storvik then
  // reduces to SIR and PL to APF.
  bool freeze_parameters = false;
};

/// Draws θ₀ and per-particle Φ from the prior; zero sufficient statistics.
ParticleSystem init_learning_particles(const PriorSpec& prior, const ModelSpec& spec,
                                       const FilterConfig& config, Rng& rng);

void lw_step(ParticleSystem& ps, const ModelSpec& spec, const LwConfig& lw, double y,
             const FilterConfig& config, Rng& rng);

void storvik_step(ParticleSystem& ps, const ModelSpec& spec, const PriorSpec& prior, double y,
                  const FilterConfig& config, Rng& rng, const LearningOptions& options = {});

void pl_step(ParticleSystem& ps, const ModelSpec& spec, const PriorSpec& prior, double y,
             const FilterConfig& config, Rng& rng, const LearningOptions& options = {});

/// Missing observation with per-particle parameters: propagate, keep
/// weights, and still add the transition to the sufficient statistics.
void propagate_only_step(ParticleSystem& ps, const ModelSpec& spec, Rng& rng,
                         const LearningOptions& options = {});

}  // namespace dglm

#endif  // DGLM_LEARNING_HPP
