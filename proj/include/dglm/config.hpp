#ifndef DGLM_CONFIG_HPP
#define DGLM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dglm/learning.hpp"
#include "dglm/model.hpp"
#include "dglm/particles.hpp"
#include "dglm/pmmh.hpp"

namespace dglm {

// Run configuration, read from a flat `key = value` text file:
//
//   format = dglm-config/1
//   model.components = lc, fourier(12, 2)
//   model.family = poisson
//   filter.type = pl
//   ...
//
// `#` starts a comment. Vectors are comma separated; a single value is
// broadcast to every state component. Inverse-gamma priors are written
// ig(shape, scale). See README for the full key list.

inline constexpr std::string_view kConfigFormat = "dglm-config/1";

enum class FilterType { Sis, Sir, Apf, Lw, Storvik, Pl };

std::string to_string(FilterType f);
FilterType parse_filter_type(std::string_view name);
bool is_learning(FilterType f);

enum class ReferenceKind { None, Kalman, Pmmh, Path };

struct ModelConfig {
  std::vector<Component> components;
  Family family = Family::Normal;
  long trials = 1;
};

struct RunConfig {
  ModelConfig model;
  std::optional<ParameterSet> params;  // known Φ (sis/sir/apf, simulate, kalman reference)
  PriorSpec prior;

  FilterType filter = FilterType::Sir;
  FilterConfig filter_config;
  LwConfig lw;

  int forecast_k = 0;
  bool one_step = false;

  PmmhConfig pmmh;
  bool pmmh_initial_set = false;

  std::string input;
  std::string output = "out";
  std::optional<std::uint64_t> seed;
  ReferenceKind reference = ReferenceKind::None;
  std::string reference_path;
  bool record_timing = true;
  int simulate_length = 0;

  // Every key as written, for the metadata echo.
  std::map<std::string, std::string> entries;

  ModelSpec model_spec() const;
  // Throws ConfigError unless the config can drive `filter`.
  void validate() const;
};

/// Parses the text form. Unknown keys and malformed values are ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// "lc, ll, fourier(288, 1)"
std::vector<Component> parse_components(std::string_view text);
Family parse_family(std::string_view name);

}  // namespace dglm

#endif  // DGLM_CONFIG_HPP
