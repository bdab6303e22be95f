// dglm: simulate, filter, pmmh and forecast from a config file.
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 IO error.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "dglm/config.hpp"
#include "dglm/errors.hpp"
#include "dglm/io.hpp"
#include "dglm/run.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_particles) {
  cmd->add_option("--config", c.config, "run configuration file")->required();
  cmd->add_option("--seed", c.seed, "overrides io.seed");
  if (with_particles) cmd->add_option("--particles", c.particles, "overrides the particle count");
  cmd->add_option("--out", c.out, "output location (overrides io.output)");
}

dglm::RunConfig load(const Common& c) {
  dglm::RunConfig cfg = dglm::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  return cfg;
}

int simulate(const Common& c, std::optional<int> length, const std::string& states_path) {
  dglm::RunConfig cfg = load(c);
  if (length) cfg.simulate_length = *length;
  if (!cfg.seed) throw dglm::ConfigError("io.seed is required (or pass --seed)");
  if (!cfg.params) throw dglm::ConfigError("simulate needs params.W (and params.V for normal)");
  if (cfg.simulate_length < 1) throw dglm::ConfigError("simulate needs simulate.T >= 1 (or --length)");
  const dglm::ModelSpec spec = cfg.model_spec();
  dglm::Rng rng(*cfg.seed);
  const dglm::Simulation sim = dglm::simulate(spec, *cfg.params, cfg.prior, cfg.simulate_length, rng);
  const std::string out = c.out.empty() ? (cfg.input.empty() ? "series.csv" : cfg.input) : c.out;
  dglm::write_series_csv(out, sim.series);
  if (!states_path.empty()) {
    std::string s = "t";
    for (int j = 1; j <= spec.state_dim(); ++j) s += ",theta_" + std::to_string(j);
    s += "\n";
    for (Eigen::Index t = 0; t < sim.states.cols(); ++t) {
      s += std::to_string(t);
      for (Eigen::Index j = 0; j < sim.states.rows(); ++j) s += "," + dglm::format_double(sim.states(j, t));
      s += "\n";
    }
    dglm::write_file_atomic(states_path, s);
  }
  std::cout << "wrote " << sim.series.size() << " observations to " << out << "\n";
  return kOk;
}

void print_summary(const dglm::RunReport& r, const std::string& dir) {
  std::cout << r.filter << ": " << r.rows.size() << " steps, " << r.mean_iteration_ms << " ms/iteration";
  if (r.state_mse) {
    std::cout << ", state MSE";
    for (Eigen::Index j = 0; j < r.state_mse->size(); ++j) std::cout << " " << (*r.state_mse)[j];
  }
  if (r.one_step_mse) std::cout << ", one-step MSE " << *r.one_step_mse;
  std::cout << "\n";
  if (r.collapse_warning) std::cout << "warning: parameter posterior collapsed (log-scale variance < 1e-6)\n";
  std::cout << "report written to " << dir << "\n";
}

int filter(const Common& c, std::optional<int> horizon) {
  dglm::RunConfig cfg = load(c);
  if (c.particles) cfg.filter_config.n_particles = *c.particles;
  if (horizon) {
    if (*horizon < 1) throw dglm::ConfigError("--k must be >= 1");
    cfg.forecast_k = *horizon;
  }
  const dglm::RunReport report = dglm::run_filter(cfg);
  dglm::emit_report(report, cfg.output);
  print_summary(report, cfg.output);
  return kOk;
}

int pmmh(const Common& c) {
  dglm::RunConfig cfg = load(c);
  if (c.particles) cfg.pmmh.n_particles = *c.particles;
  if (cfg.input.empty()) throw dglm::ConfigError("io.input is required");
  const dglm::RunReport report = dglm::run_pmmh(cfg, dglm::parse_csv(cfg.input));
  dglm::emit_report(report, cfg.output);
  std::cout << "pmmh: " << report.pmmh->draws.size() << " iterations, acceptance rate "
            << report.pmmh->acceptance_rate() << "\n"
            << "trace written to " << cfg.output << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential Monte Carlo for dynamic generalised linear models"};
  app.set_version_flag("--version", std::string(DGLM_VERSION));
  app.require_subcommand(1);

  Common sim_opts, filter_opts, pmmh_opts, forecast_opts;
  std::optional<int> length, horizon;
  std::string states_path;

  auto* sim = app.add_subcommand("simulate", "simulate a series from model + parameters");
  add_common(sim, sim_opts, false);
  sim->add_option("--length", length, "series length (overrides simulate.T)");
  sim->add_option("--states", states_path, "also write the true states to this CSV");

  auto* flt = app.add_subcommand("filter", "run the configured particle filter");
  add_common(flt, filter_opts, true);

  auto* pm = app.add_subcommand("pmmh", "run particle marginal Metropolis-Hastings");
  add_common(pm, pmmh_opts, true);

  auto* fc = app.add_subcommand("forecast", "re-run the filter and forecast k steps ahead");
  add_common(fc, forecast_opts, true);
  fc->add_option("--k", horizon, "forecast horizon (overrides forecast.k)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) return simulate(sim_opts, length, states_path);
    if (*flt) return filter(filter_opts, std::nullopt);
    if (*pm) return pmmh(pmmh_opts);
    if (*fc) {
      if (!horizon) {
        const auto cfg = dglm::load_config(forecast_opts.config);
        if (cfg.forecast_k < 1) throw dglm::ConfigError("forecast needs --k or forecast.k >= 1");
      }
      return filter(forecast_opts, horizon);
    }
  } catch (const dglm::WeightCollapse& e) {
    std::cerr << "error: " << e.what() << " (t = " << e.time_index() << ")\n";
    return kNumerical;
  } catch (const dglm::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const dglm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const dglm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
