#pragma once

#include <stdexcept>
#include <string>

namespace wcps {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model parameter is out of range; the message names the field.
class ParameterError : public Error {
 public:
  ParameterError(const std::string& field, const std::string& what)
      : Error("invalid parameter '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Riccati iteration did not converge (unstabilizable pair or cap hit).
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be Schur stable is not.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

class CertificationError : public Error {
 public:
  CertificationError(int mode_id, const std::string& what)
      : Error("mode " + std::to_string(mode_id) + " not certified: " + what),
        mode_id_(mode_id) {}
  int mode_id() const noexcept { return mode_id_; }

 private:
  int mode_id_;
};

class TimingInfeasibleError : public Error {
 public:
  TimingInfeasibleError(const std::string& what, double deficit_ms)
      : Error(what), deficit_ms_(deficit_ms) {}
  double deficit_ms() const noexcept { return deficit_ms_; }

 private:
  double deficit_ms_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcps
