#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfmm {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeoError : public Error {
 public:
  using Error::Error;
};

// A point was farther from the projection origin than the equirectangular
// approximation supports.
class OutOfEnvelopeError : public GeoError {
 public:
  using GeoError::GeoError;
};

// Network construction failed. Carries every validation problem found, not
// just the first.
class NetworkError : public Error {
 public:
  explicit NetworkError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// An edge sequence is not connected; break_index is the position of the
// first edge that does not continue from its predecessor.
class PathError : public Error {
 public:
  PathError(const std::string& what, std::size_t break_index)
      : Error(what), break_index_(break_index) {}
  std::size_t break_index() const noexcept { return break_index_; }

 private:
  std::size_t break_index_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class FilterError : public Error {
 public:
  using Error::Error;
};

// No road edge lies within the search radius of the starting observation.
class UnmatchableStartError : public FilterError {
 public:
  using FilterError::FilterError;
};

// Rejection sampling for the initial particle cloud accepted too few proposals.
class InitializationError : public FilterError {
 public:
  using FilterError::FilterError;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfmm
