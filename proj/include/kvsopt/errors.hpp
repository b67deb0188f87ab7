#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kvs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown during a run. The CLI maps this to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An objective evaluation produced NaN or infinity.
class NonFiniteValue : public NumericError {
 public:
  NonFiniteValue(std::vector<double> x, std::size_t sample_index, double value);

  const std::vector<double>& x() const noexcept { return x_; }
  std::size_t sample_index() const noexcept { return sample_index_; }
  double value() const noexcept { return value_; }

 private:
  std::vector<double> x_;
  std::size_t sample_index_;
  double value_;
};

/// A particle position became non-finite after an update.
class NonFinitePosition : public NumericError {
 public:
  NonFinitePosition(std::size_t particle, std::size_t iterate);

  std::size_t particle() const noexcept { return particle_; }
  std::size_t iterate() const noexcept { return iterate_; }

 private:
  std::size_t particle_;
  std::size_t iterate_;
};

/// The adaptive integrator could not make progress.
class StiffnessError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The objective does not carry the lower/upper bound functions.
class BoundsUnavailable : public Error {
 public:
  BoundsUnavailable() : Error("bounds unavailable") {}
};

}  // namespace kvs
