#ifndef DGLM_RUN_HPP
#define DGLM_RUN_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "dglm/config.hpp"
#include "dglm/forecast.hpp"
#include "dglm/pmmh.hpp"

namespace dglm {

struct StepRecord {
  long t = 0;
  std::optional<double> y;
  double ess = 0.0;
  Eigen::VectorXd mean, lo, hi;                    // state, 95% band
  Eigen::VectorXd param_mean, param_lo, param_hi;  // W_1..W_m[, V]
  std::optional<double> one_step;                  // ŷ_t before y_t was seen
  double time_ms = 0.0;
};

struct RunReport {
  std::string filter;
  std::uint64_t seed = 0;
  int state_dim = 0;
  std::vector<std::string> param_names;
  std::vector<StepRecord> rows;

  double total_ms = 0.0;
  double mean_iteration_ms = 0.0;
  int collapse_resets = 0;
  // Weighted variance of each log-parameter at the last step.
  std::vector<double> final_log_param_variance;
  bool collapse_warning = false;

  std::optional<Eigen::VectorXd> state_mse;
  std::optional<double> one_step_mse;
  std::optional<BandSummary> forecast;
  std::optional<PmmhTrace> pmmh;
  // Reference state means (m x T) used for state_mse, when one was built.
  std::optional<Eigen::MatrixXd> reference;

  nlohmann::json meta;

  Eigen::MatrixXd filtered_means() const;  // m x T
};

// Log-scale posterior variance below this flags a collapsed parameter cloud.
inline constexpr double kCollapseVariance = 1e-6;

/// Runs the configured filter over `series`; missing rows go through the
/// propagate-only step. WeightCollapse propagates with its time index.
RunReport run_filter(const RunConfig& config, const TimeSeries& series);
// Reads config.input.
RunReport run_filter(const RunConfig& config);

/// PMMH alone on the series: trace plus the reference trajectory, no
/// per-step rows.
RunReport run_pmmh(const RunConfig& config, const TimeSeries& series);

/// states.csv and params.csv (filter runs), onestep.csv, forecast.csv,
/// pmmh_trace.csv and reference.csv when present, and meta.json. Each file
/// is written atomically.
void emit_report(const RunReport& report, const std::string& dir);

}  // namespace dglm

#endif  // DGLM_RUN_HPP
