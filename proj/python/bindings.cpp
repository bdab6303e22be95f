#include <cmath>
#include <optional>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dglm/config.hpp"
#include "dglm/errors.hpp"
#include "dglm/kalman.hpp"
#include "dglm/pmmh.hpp"
#include "dglm/resampling.hpp"
#include "dglm/run.hpp"
#include "dglm/stats.hpp"

namespace py = pybind11;
using namespace dglm;

namespace {

// None or NaN marks a missing value.
TimeSeries make_series(const std::vector<long>& t, const std::vector<std::optional<double>>& y) {
  if (t.size() != y.size()) throw ConfigError("t and y differ in length");
  TimeSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::optional<double> v = y[i];
    if (v && std::isnan(*v)) v.reset();
    s.push_back(t[i], v);
  }
  return s;
}

py::dict series_dict(const TimeSeries& s) {
  std::vector<long> t;
  std::vector<std::optional<double>> y;
  for (const auto& o : s) {
    t.push_back(o.t);
    y.push_back(o.y);
  }
  py::dict d;
  d["t"] = t;
  d["y"] = y;
  return d;
}

RunConfig config_with_seed(const std::string& text, std::optional<std::uint64_t> seed) {
  RunConfig cfg = parse_config(text);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sequential Monte Carlo filters for dynamic generalised linear models";
  m.attr("__version__") = DGLM_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("simulate",
        [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> length) {
          RunConfig cfg = config_with_seed(config, seed);
          if (length) cfg.simulate_length = *length;
          if (!cfg.seed) throw ConfigError("seed required");
          if (!cfg.params) throw ConfigError("simulate needs params.W");
          Rng rng(*cfg.seed);
          const Simulation sim = dglm::simulate(cfg.model_spec(), *cfg.params, cfg.prior, cfg.simulate_length, rng);
          py::dict d = series_dict(sim.series);
          d["states"] = sim.states;
          return d;
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("length") = py::none(),
        "Simulate a series from a config text. Returns t, y (None = missing) and the m x (T+1) states.");

  m.def("run_filter",
        [](const std::string& config, const std::vector<long>& t, const std::vector<std::optional<double>>& y,
           std::optional<std::uint64_t> seed, std::optional<int> particles) {
          RunConfig cfg = config_with_seed(config, seed);
          if (particles) cfg.filter_config.n_particles = *particles;
          const RunReport r = dglm::run_filter(cfg, make_series(t, y));
          const auto n = static_cast<Eigen::Index>(r.rows.size());
          const auto p = static_cast<Eigen::Index>(r.param_names.size());
          Eigen::MatrixXd mean(r.state_dim, n), lo(r.state_dim, n), hi(r.state_dim, n);
          Eigen::MatrixXd pmean(p, n);
          Eigen::VectorXd ess(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = r.rows[static_cast<std::size_t>(i)];
            mean.col(i) = row.mean;
            lo.col(i) = row.lo;
            hi.col(i) = row.hi;
            pmean.col(i) = row.param_mean;
            ess[i] = row.ess;
          }
          py::dict d;
          d["mean"] = mean;
          d["lo"] = lo;
          d["hi"] = hi;
          d["ess"] = ess;
          d["param_names"] = r.param_names;
          d["param_mean"] = pmean;
          d["collapse_warning"] = r.collapse_warning;
          if (r.state_mse) d["state_mse"] = *r.state_mse;
          if (r.one_step_mse) d["one_step_mse"] = *r.one_step_mse;
          if (r.forecast) {
            d["forecast_mean"] = r.forecast->state_mean;
            d["forecast_obs_lo"] = r.forecast->obs_lo;
            d["forecast_obs_hi"] = r.forecast->obs_hi;
          }
          d["meta"] = r.meta.dump();
          return d;
        },
        py::arg("config"), py::arg("t"), py::arg("y"), py::arg("seed") = py::none(),
        py::arg("particles") = py::none(), "Run the configured filter over (t, y).");

  m.def("run_pmmh",
        [](const std::string& config, const std::vector<long>& t, const std::vector<std::optional<double>>& y,
           std::optional<std::uint64_t> seed) {
          const RunConfig cfg = config_with_seed(config, seed);
          const RunReport r = dglm::run_pmmh(cfg, make_series(t, y));
          const auto& tr = *r.pmmh;
          const auto n = static_cast<Eigen::Index>(tr.draws.size());
          const auto p = static_cast<Eigen::Index>(r.param_names.size());
          Eigen::MatrixXd draws(n, p);
          for (Eigen::Index i = 0; i < n; ++i) {
            const auto& d = tr.draws[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < d.W.rows(); ++j) draws(i, j) = d.W(j, j);
            if (d.V) draws(i, p - 1) = *d.V;
          }
          py::dict d;
          d["draws"] = draws;
          d["param_names"] = r.param_names;
          d["loglik"] = tr.loglik;
          d["acceptance_rate"] = tr.acceptance_rate();
          d["burn_in"] = tr.burn_in;
          d["thin"] = tr.thin;
          if (r.reference) d["reference"] = *r.reference;
          return d;
        },
        py::arg("config"), py::arg("t"), py::arg("y"), py::arg("seed") = py::none(),
        "Particle marginal Metropolis-Hastings over the variance parameters.");

  m.def("kalman_filter",
        [](const std::string& config, const std::vector<long>& t, const std::vector<std::optional<double>>& y) {
          const RunConfig cfg = parse_config(config);
          if (!cfg.params) throw ConfigError("kalman_filter needs params.W and params.V");
          const KalmanResult kr = dglm::kalman_filter(make_series(t, y), cfg.model_spec(), *cfg.params, cfg.prior);
          Eigen::MatrixXd means(cfg.model_spec().state_dim(), static_cast<Eigen::Index>(kr.means.size()));
          for (std::size_t i = 0; i < kr.means.size(); ++i) means.col(static_cast<Eigen::Index>(i)) = kr.means[i];
          py::dict d;
          d["mean"] = means;
          d["loglik"] = kr.loglik;
          return d;
        },
        py::arg("config"), py::arg("t"), py::arg("y"), "Exact filter for the Normal family.");

  m.def("estimate_loglik",
        [](const std::string& config, const std::vector<long>& t, const std::vector<std::optional<double>>& y,
           int particles, std::uint64_t seed) {
          const RunConfig cfg = parse_config(config);
          if (!cfg.params) throw ConfigError("estimate_loglik needs params.W");
          Rng rng(seed);
          return dglm::estimate_loglik(make_series(t, y), cfg.model_spec(), *cfg.params, cfg.prior, particles, rng);
        },
        py::arg("config"), py::arg("t"), py::arg("y"), py::arg("particles"), py::arg("seed"),
        "SMC estimate of log p(y_1:T | params).");

  m.def("ess", [](const Eigen::VectorXd& log_weights) { return dglm::ess(log_weights); }, py::arg("log_weights"));

  m.def("normalize_log_weights",
        [](const Eigen::VectorXd& raw) { return normalize_log_weights(raw).log_weights; }, py::arg("raw"));

  m.def("resample",
        [](const std::string& kind, const Eigen::VectorXd& weights, std::uint64_t seed) {
          WeightVector w;
          w.log_weights = weights.array().log().matrix();
          w.normalized = true;
          Rng rng(seed);
          return dglm::resample(parse_resampler(kind), w, rng);
        },
        py::arg("kind"), py::arg("weights"), py::arg("seed"),
        "Parent indices for normalized weights; kind is multinomial, stratified or systematic.");

  m.def("weighted_quantile", &weighted_quantile, py::arg("values"), py::arg("weights"), py::arg("p"));
}
