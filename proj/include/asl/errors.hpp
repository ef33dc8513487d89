#pragma once

#include <stdexcept>
#include <string>

namespace asl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// (s, g) has no path to success.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// (s, g) is already a success state; no optimal action exists.
class SuccessStateError : public Error {
 public:
  using Error::Error;
};

/// A KL term is infinite: the model assigns zero mass where the target has mass.
class InfiniteDivergence : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}
  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A resumable output was produced under a different configuration.
class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace asl
