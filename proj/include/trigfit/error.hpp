#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trigfit {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An input lies outside the domain of one of the factors (log x <= 0, tan pole).
class DomainError : public Error {
 public:
  DomainError(const std::string& factor, double x, const std::string& why)
      : Error(factor + " is undefined at x=" + std::to_string(x) + ": " + why),
        factor_(factor),
        x_(x) {}
  explicit DomainError(const std::string& msg) : Error(msg) {}

  const std::string& factor() const noexcept { return factor_; }
  double x() const noexcept { return x_; }

 private:
  std::string factor_;
  double x_ = 0.0;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : Error(msg + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Every row of a design matrix was rejected by the domain filter.
class EmptyDesign : public Error {
 public:
  using Error::Error;
};

class RankDeficiency : public Error {
 public:
  RankDeficiency(const std::string& msg, std::vector<std::string> dependent)
      : Error(msg), dependent_(std::move(dependent)) {}

  /// Names of columns found to be linearly dependent on earlier pivots.
  const std::vector<std::string>& dependent_columns() const noexcept { return dependent_; }

 private:
  std::vector<std::string> dependent_;
};

/// Audio container or encoding problem.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A gradient-descent parameter became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t wave, std::size_t pass, std::size_t sample)
      : Error("parameters diverged at wave " + std::to_string(wave) + ", pass " +
              std::to_string(pass) + ", sample " + std::to_string(sample)),
        wave_(wave),
        pass_(pass),
        sample_(sample) {}

  std::size_t wave() const noexcept { return wave_; }
  std::size_t pass() const noexcept { return pass_; }
  std::size_t sample() const noexcept { return sample_; }

 private:
  std::size_t wave_, pass_, sample_;
};

}  // namespace trigfit
