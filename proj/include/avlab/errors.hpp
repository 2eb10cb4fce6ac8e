#ifndef AVLAB_ERRORS_HPP
#define AVLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace avlab {

/// Invalid or inconsistent user configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical integrity violation: NaN, out-of-range density, CFL breach,
/// non-finite gradient (CLI exit code 3).
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or serialization failure (CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace avlab

#endif
