#pragma once

#include <stdexcept>
#include <string>

namespace csnorm {

// Raised when u² exceeds the exponential overflow guard.
class MagnitudeOverflow : public std::runtime_error {
public:
  explicit MagnitudeOverflow(const std::string& what) : std::runtime_error(what) {}
};

class NumericFailure : public std::runtime_error {
public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

class OutOfRegime : public std::runtime_error {
public:
  explicit OutOfRegime(const std::string& what) : std::runtime_error(what) {}
};

class ReparameterizationFailure : public std::runtime_error {
public:
  explicit ReparameterizationFailure(const std::string& what) : std::runtime_error(what) {}
};

class AdmissibilityFailure : public std::runtime_error {
public:
  explicit AdmissibilityFailure(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kOverflowGuard = 700.0;

}  // namespace csnorm
