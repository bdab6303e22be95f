#include "dglm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dglm/errors.hpp"

namespace dglm {

std::string to_string(FilterType f) {
  switch (f) {
    case FilterType::Sis: return "sis";
    case FilterType::Sir: return "sir";
    case FilterType::Apf: return "apf";
    case FilterType::Lw: return "lw";
    case FilterType::Storvik: return "storvik";
    case FilterType::Pl: return "pl";
  }
  return "?";
}

FilterType parse_filter_type(std::string_view name) {
  for (auto f : {FilterType::Sis, FilterType::Sir, FilterType::Apf, FilterType::Lw, FilterType::Storvik,
                 FilterType::Pl})
    if (to_string(f) == name) return f;
  throw ConfigError("unknown filter type '" + std::string(name) + "' (expected sis|sir|apf|lw|storvik|pl)");
}

bool is_learning(FilterType f) {
  return f == FilterType::Lw || f == FilterType::Storvik || f == FilterType::Pl;
}

Family parse_family(std::string_view name) {
  if (name == "normal") return Family::Normal;
  if (name == "poisson") return Family::Poisson;
  if (name == "binomial") return Family::Binomial;
  throw ConfigError("unknown family '" + std::string(name) + "' (expected normal|poisson|binomial)");
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Top-level comma split; commas inside parentheses stay.
std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      std::string item = trim(s.substr(start, i - start));
      if (!item.empty()) out.push_back(std::move(item));
      start = i + 1;
    } else if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      --depth;
    }
  }
  if (depth != 0) throw ConfigError("unbalanced parentheses in '" + std::string(s) + "'");
  return out;
}

double parse_double(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  return v;
}

long parse_long(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  return v;
}

int parse_int(const std::string& key, std::string_view text) {
  const long v = parse_long(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(key + ": integer out of range");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + t + "'");
}

// "name(a, b)" -> {a, b}
std::vector<std::string> call_args(const std::string& key, const std::string& item, std::string_view name) {
  const std::string t = lower(trim(item));
  if (t.rfind(name, 0) != 0 || t.size() < name.size() + 2 || t[name.size()] != '(' || t.back() != ')')
    throw ConfigError(key + ": expected " + std::string(name) + "(...), got '" + item + "'");
  return split_list(std::string_view(t).substr(name.size() + 1, t.size() - name.size() - 2));
}

InverseGamma parse_ig(const std::string& key, const std::string& item) {
  const auto args = call_args(key, item, "ig");
  if (args.size() != 2) throw ConfigError(key + ": ig takes (shape, scale)");
  return {parse_double(key, args[0]), parse_double(key, args[1])};
}

// Scalar broadcast or exactly m values.
Eigen::VectorXd parse_vector(const std::string& key, const std::string& text, int m) {
  const auto items = split_list(text);
  if (items.size() == 1) return Eigen::VectorXd::Constant(m, parse_double(key, items[0]));
  if (static_cast<int>(items.size()) != m)
    throw ConfigError(key + ": expected 1 or " + std::to_string(m) + " values, got " +
                      std::to_string(items.size()));
  Eigen::VectorXd v(m);
  for (int j = 0; j < m; ++j) v[j] = parse_double(key, items[static_cast<std::size_t>(j)]);
  return v;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "format",          "model.components",   "model.family",      "model.trials",
      "params.W",        "params.V",           "prior.m0",          "prior.C0",
      "prior.W",         "prior.V",            "filter.type",       "filter.particles",
      "filter.resampler", "filter.ess_threshold", "filter.delta",    "filter.on_collapse",
      "forecast.k",      "forecast.one_step",  "pmmh.iterations",   "pmmh.particles",
      "pmmh.burn_in",    "pmmh.thin",          "pmmh.step",         "pmmh.likelihood",
      "pmmh.estimate",   "pmmh.initial.W",     "pmmh.initial.V",    "io.input",
      "io.output",       "io.seed",            "io.reference",      "io.record_timing",
      "simulate.T"};
  return keys;
}

}  // namespace

std::vector<Component> parse_components(std::string_view text) {
  std::vector<Component> out;
  for (const auto& item : split_list(text)) {
    const std::string t = lower(item);
    if (t == "lc" || t == "locally_constant") {
      out.push_back(Component::locally_constant());
    } else if (t == "ll" || t == "locally_linear") {
      out.push_back(Component::locally_linear());
    } else if (t.rfind("fourier", 0) == 0) {
      const auto args = call_args("model.components", item, "fourier");
      if (args.empty() || args.size() > 2) throw ConfigError("fourier takes (period[, harmonics])");
      const int period = parse_int("model.components", args[0]);
      const int harmonics = args.size() == 2 ? parse_int("model.components", args[1]) : 1;
      out.push_back(Component::fourier(period, harmonics));
    } else {
      throw ConfigError("unknown model component '" + item + "' (expected lc, ll or fourier(p, h))");
    }
  }
  if (out.empty()) throw ConfigError("model.components is empty");
  return out;
}

ModelSpec RunConfig::model_spec() const {
  return ModelSpec(model.family, build_structure(model.components), model.trials);
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!known_keys().count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (cfg.entries.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.entries[key] = value;
  }
  const auto& e = cfg.entries;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = e.find(key);
    if (it == e.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("format"); v && *v != kConfigFormat)
    throw ConfigError("config format '" + *v + "' is not supported (expected " + std::string(kConfigFormat) + ")");

  const auto components = get("model.components");
  if (!components) throw ConfigError("model.components is required");
  cfg.model.components = parse_components(*components);
  if (auto v = get("model.family")) cfg.model.family = parse_family(lower(*v));
  if (auto v = get("model.trials")) cfg.model.trials = parse_long("model.trials", *v);
  const ModelSpec spec = cfg.model_spec();
  const int m = spec.state_dim();
  const bool normal = spec.has_observation_variance();

  if (auto w = get("params.W")) {
    ParameterSet p = ParameterSet::diagonal(parse_vector("params.W", *w, m));
    if (auto v = get("params.V")) p.V = parse_double("params.V", *v);
    cfg.params = p;
  } else if (get("params.V")) {
    throw ConfigError("params.V given without params.W");
  }

  cfg.prior.m0 = get("prior.m0") ? parse_vector("prior.m0", *get("prior.m0"), m) : Eigen::VectorXd::Zero(m);
  cfg.prior.C0 = (get("prior.C0") ? parse_vector("prior.C0", *get("prior.C0"), m)
                                  : Eigen::VectorXd::Ones(m))
                     .asDiagonal();
  std::vector<InverseGamma> w_prior(static_cast<std::size_t>(m), InverseGamma{1.0, 1.0});
  if (auto v = get("prior.W")) {
    const auto items = split_list(*v);
    if (items.size() == 1) {
      std::fill(w_prior.begin(), w_prior.end(), parse_ig("prior.W", items[0]));
    } else if (static_cast<int>(items.size()) == m) {
      for (int j = 0; j < m; ++j) w_prior[static_cast<std::size_t>(j)] = parse_ig("prior.W", items[static_cast<std::size_t>(j)]);
    } else {
      throw ConfigError("prior.W: expected 1 or " + std::to_string(m) + " ig(...) entries");
    }
  }
  cfg.prior.w_prior = w_prior;
  if (normal) cfg.prior.v_prior = get("prior.V") ? parse_ig("prior.V", *get("prior.V")) : InverseGamma{1.0, 1.0};

  if (auto v = get("filter.type")) cfg.filter = parse_filter_type(lower(*v));
  if (auto v = get("filter.particles")) cfg.filter_config.n_particles = parse_int("filter.particles", *v);
  if (auto v = get("filter.resampler")) cfg.filter_config.resampler = parse_resampler(lower(*v));
  if (auto v = get("filter.ess_threshold"))
    cfg.filter_config.resample_policy = ResamplePolicy::ess_below(parse_double("filter.ess_threshold", *v));
  if (auto v = get("filter.delta")) {
    cfg.lw.delta = parse_double("filter.delta", *v);
    cfg.lw.validate();  // a stray bad value is an error even when unused
  }
  if (auto v = get("filter.on_collapse")) {
    const std::string s = lower(*v);
    if (s == "abort")
      cfg.filter_config.on_collapse = CollapsePolicy::Abort;
    else if (s == "reset")
      cfg.filter_config.on_collapse = CollapsePolicy::ResetUniform;
    else
      throw ConfigError("filter.on_collapse: expected abort|reset");
  }

  if (auto v = get("forecast.k")) cfg.forecast_k = parse_int("forecast.k", *v);
  if (auto v = get("forecast.one_step")) cfg.one_step = parse_bool("forecast.one_step", *v);

  if (auto v = get("pmmh.iterations")) cfg.pmmh.n_iter = parse_int("pmmh.iterations", *v);
  if (auto v = get("pmmh.particles")) cfg.pmmh.n_particles = parse_int("pmmh.particles", *v);
  if (auto v = get("pmmh.burn_in")) cfg.pmmh.burn_in = parse_int("pmmh.burn_in", *v);
  if (auto v = get("pmmh.thin")) cfg.pmmh.thin = parse_int("pmmh.thin", *v);
  if (auto v = get("pmmh.likelihood")) cfg.pmmh.likelihood = parse_likelihood_source(lower(*v));
  if (auto v = get("pmmh.estimate")) {
    cfg.pmmh.estimate_w.assign(static_cast<std::size_t>(m), false);
    cfg.pmmh.estimate_v = false;
    for (const auto& item : split_list(*v)) {
      if (item == "W") {
        std::fill(cfg.pmmh.estimate_w.begin(), cfg.pmmh.estimate_w.end(), true);
      } else if (item == "V") {
        cfg.pmmh.estimate_v = true;
      } else if (item.size() > 1 && item[0] == 'W') {
        const int j = parse_int("pmmh.estimate", item.substr(1));
        if (j < 1 || j > m) throw ConfigError("pmmh.estimate: W index out of range in '" + item + "'");
        cfg.pmmh.estimate_w[static_cast<std::size_t>(j - 1)] = true;
      } else {
        throw ConfigError("pmmh.estimate: expected W, W<j> or V, got '" + item + "'");
      }
    }
  }
  if (auto w = get("pmmh.initial.W")) {
    cfg.pmmh.initial = ParameterSet::diagonal(parse_vector("pmmh.initial.W", *w, m));
    if (auto v = get("pmmh.initial.V")) cfg.pmmh.initial.V = parse_double("pmmh.initial.V", *v);
    cfg.pmmh_initial_set = true;
  } else if (cfg.params) {
    cfg.pmmh.initial = *cfg.params;
    cfg.pmmh_initial_set = true;
  }
  if (auto v = get("pmmh.step")) {
    int d = 0;
    const auto mask = cfg.pmmh.estimate_w.empty() ? std::vector<bool>(static_cast<std::size_t>(m), true)
                                                  : cfg.pmmh.estimate_w;
    for (bool b : mask) d += b ? 1 : 0;
    if (cfg.pmmh.estimate_v && normal) ++d;
    if (d == 0) throw ConfigError("pmmh.step: no coordinate is estimated");
    const Eigen::VectorXd sd = parse_vector("pmmh.step", *v, d);
    cfg.pmmh.step_covariance = sd.cwiseAbs2().asDiagonal();
  }

  if (auto v = get("io.input")) cfg.input = *v;
  if (auto v = get("io.output")) cfg.output = *v;
  if (auto v = get("io.seed")) {
    const long s = parse_long("io.seed", *v);
    if (s < 0) throw ConfigError("io.seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("io.reference")) {
    const std::string s = lower(*v);
    if (s == "none")
      cfg.reference = ReferenceKind::None;
    else if (s == "kalman")
      cfg.reference = ReferenceKind::Kalman;
    else if (s == "pmmh")
      cfg.reference = ReferenceKind::Pmmh;
    else {
      cfg.reference = ReferenceKind::Path;
      cfg.reference_path = *v;
    }
  }
  if (auto v = get("io.record_timing")) cfg.record_timing = parse_bool("io.record_timing", *v);
  if (auto v = get("simulate.T")) cfg.simulate_length = parse_int("simulate.T", *v);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  const ModelSpec spec = model_spec();
  if (!seed) throw ConfigError("io.seed is required (or pass --seed)");
  filter_config.validate();
  validate_prior(spec, prior);
  if (params) validate_parameters(spec, *params);
  if (!is_learning(filter) && !params)
    throw ConfigError("filter " + to_string(filter) + " needs known parameters (params.W, params.V)");
  if (filter == FilterType::Lw) lw.validate();
  if (forecast_k < 0) throw ConfigError("forecast.k must be >= 0");
  if (reference == ReferenceKind::Kalman) {
    if (spec.family() != Family::Normal) throw ConfigError("io.reference = kalman needs the normal family");
    if (!params) throw ConfigError("io.reference = kalman needs params.W and params.V");
  }
  if (reference == ReferenceKind::Pmmh) {
    if (!pmmh_initial_set) throw ConfigError("io.reference = pmmh needs pmmh.initial.W (or params.W)");
    validate_pmmh(pmmh, spec, prior);
  }
}

}  // namespace dglm
