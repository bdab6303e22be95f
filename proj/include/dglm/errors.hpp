#ifndef DGLM_ERRORS_HPP
#define DGLM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dglm {

// Invalid model, prior, or run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown (non-finite state, non-positive innovation variance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every particle weight is zero or NaN. The driver decides between
// aborting and resetting to uniform weights.
class WeightCollapse : public NumericalError {
 public:
  explicit WeightCollapse(const std::string& what, long time_index = -1)
      : NumericalError(what), time_index_(time_index) {}

  long time_index() const { return time_index_; }

 private:
  long time_index_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dglm

#endif  // DGLM_ERRORS_HPP
