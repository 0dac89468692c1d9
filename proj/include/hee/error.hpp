#pragma once

#include <stdexcept>
#include <string>

namespace hee {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quadrature integrand, drift or state left the finite range.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// A natural parameter left the supported interval [-kEtaLimit, kEtaLimit].
class EtaOutOfRange : public Error {
 public:
  EtaOutOfRange(int layer, int unit, double value)
      : Error("natural parameter out of range at layer " + std::to_string(layer) +
              ", unit " + std::to_string(unit) + ": " + std::to_string(value)),
        layer_(layer),
        unit_(unit),
        value_(value) {}

  int layer() const { return layer_; }
  int unit() const { return unit_; }
  double value() const { return value_; }

 private:
  int layer_;
  int unit_;
  double value_;
};

/// Invalid configuration or model specification. `key()` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// File input/output or format failure.
class IoError : public Error {
 public:
  using Error::Error;
};

class BadMagic : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedFile : public IoError {
 public:
  using IoError::IoError;
};

class DimensionMismatch : public IoError {
 public:
  using IoError::IoError;
};

/// Training stopped because the held-out energy blew up.
class Diverged : public Error {
 public:
  using Error::Error;
};

}  // namespace hee
