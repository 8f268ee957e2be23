#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace volrank {

/// Malformed input file row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Two rows describing the same cell.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested estimation window does not fit inside the trading calendar.
class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cross-sectional design matrix is rank deficient after constraints.
class SingularFitError : public std::runtime_error {
 public:
  SingularFitError(std::string block, std::string factor)
      : std::runtime_error("singular cross-sectional fit in " + block + " block (factor '" +
                           factor + "')"),
        block_(std::move(block)),
        factor_(std::move(factor)) {}

  const std::string& block() const noexcept { return block_; }
  const std::string& factor() const noexcept { return factor_; }

 private:
  std::string block_;
  std::string factor_;
};

class NearestPdError : public std::runtime_error {
 public:
  NearestPdError(int iterations, double eigen_gap)
      : std::runtime_error("nearest PD repair did not converge after " +
                           std::to_string(iterations) +
                           " iterations (min eigenvalue gap " + std::to_string(eigen_gap) + ")"),
        iterations_(iterations),
        eigen_gap_(eigen_gap) {}

  int iterations() const noexcept { return iterations_; }
  double eigen_gap() const noexcept { return eigen_gap_; }

 private:
  int iterations_;
  double eigen_gap_;
};

/// Should-not-happen numerical state, e.g. a negative quadratic form after repair.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace volrank
