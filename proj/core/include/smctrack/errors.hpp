#pragma once

#include <stdexcept>
#include <string>

namespace smctrack {

/// Malformed input file. Message carries source name and line number.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Frames handed to the tracker out of order.
class SequencingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerically singular innovation covariance; caller should reset the track.
class DegenerateFilterError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Kalman state with non-positive aspect ratio or height.
class DegenerateStateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Metric requested on an empty denominator (e.g. MOTA with zero gt boxes).
class UndefinedMetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training loss became non-finite.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(int epoch, const std::string& what)
      : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

private:
  int epoch_;
};

}  // namespace smctrack
