#pragma once

#include <stdexcept>
#include <string>

namespace couette {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, configuration document, or parameter value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Configuration document that could not be parsed.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ConfigError("parse error at line " + std::to_string(line) + ", column " +
                    std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A well-formed document carrying an invalid value; names the offending key.
class ValidationError : public ConfigError {
 public:
  ValidationError(std::string field, const std::string& what)
      : ConfigError("invalid '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Argument outside the mathematical domain of an operation (t <= 0, p < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Requested time outside a trajectory's sample range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable samples for a least-squares fit.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Two fields (or a file and a grid) disagree in shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical method to stay resolved on its grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Spectral shift reads content from outside the resolved band.
class AliasingError : public ResolutionError {
 public:
  AliasingError(const std::string& what, int mode_x, int mode_y)
      : ResolutionError(what), mode_x_(mode_x), mode_y_(mode_y) {}
  int mode_x() const noexcept { return mode_x_; }
  int mode_y() const noexcept { return mode_y_; }

 private:
  int mode_x_;
  int mode_y_;
};

/// Off-lattice spectral evaluation requested on a field whose spectrum reaches the band edge.
class InterpolationAccuracyError : public ResolutionError {
 public:
  InterpolationAccuracyError(const std::string& what, double edge_ratio)
      : ResolutionError(what), edge_ratio_(edge_ratio) {}
  double edge_ratio() const noexcept { return edge_ratio_; }

 private:
  double edge_ratio_;
};

/// Field carries too much mass near the box boundary for a coordinate remap.
class TruncationError : public ResolutionError {
 public:
  TruncationError(const std::string& what, double tail)
      : ResolutionError(what), tail_(tail) {}
  double tail() const noexcept { return tail_; }

 private:
  double tail_;
};

/// Solver left its stable regime (Picard non-contraction, time-stepper blow-up).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double ratio) : Error(what), ratio_(ratio) {}
  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

class NoConvergenceError : public DivergenceError {
 public:
  using DivergenceError::DivergenceError;
};

/// Snapshot file damaged or inconsistent with its metadata.
class SnapshotError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public SnapshotError {
 public:
  using SnapshotError::SnapshotError;
};

}  // namespace couette
