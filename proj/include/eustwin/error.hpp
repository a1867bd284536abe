#pragma once

#include <stdexcept>
#include <string>

namespace eustwin {

// Invalid parameters, configuration or preconditions on user-supplied settings.
// The command line maps these to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with data: missing files, mismatched dimensions, undefined metrics.
// The command line maps these to exit status 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpecError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UndersamplingError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

// A metric whose denominator vanishes (zero noise std, constant region, ...).
class UndefinedMetric : public DataError {
 public:
  using DataError::DataError;
};

// FWHM peak sits too close to the profile boundary to find a half-max crossing.
class BoundaryError : public DataError {
 public:
  using DataError::DataError;
};

class IncompleteError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace eustwin
