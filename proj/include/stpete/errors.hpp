#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stpete {

/// A parameter outside the documented domain of an operation. `parameter()`
/// names the offending input so front ends can point at the right flag.
class invalid_argument : public std::invalid_argument {
 public:
  invalid_argument(std::string parameter, const std::string& what)
      : std::invalid_argument(parameter + ": " + what), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

/// A numerical procedure ran out of budget before reaching its tolerance.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact engine refused a request that would exceed its memory guard.
class capacity_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

inline void require(bool ok, const char* parameter, const std::string& what) {
  if (!ok) throw invalid_argument(parameter, what);
}

}  // namespace detail
}  // namespace stpete
