#ifndef BEAMFLOW_ERROR_H_
#define BEAMFLOW_ERROR_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace beamflow {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (negative power,
// zero distance, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A scenario, commodity set, or config failed validation. `field()` names the
// first offending field, e.g. "nodes[3].id".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class NoRouteError : public Error {
 public:
  NoRouteError(std::vector<int> commodities, const std::string& message)
      : Error(message), commodities_(std::move(commodities)) {}

  // Indices of the commodities that could not be routed.
  const std::vector<int>& commodities() const { return commodities_; }

 private:
  std::vector<int> commodities_;
};

class DivergedError : public Error {
 public:
  DivergedError(long iteration, const std::string& message)
      : Error(message), iteration_(iteration) {}

  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

class LineSearchError : public Error {
 public:
  LineSearchError(int node, const std::string& message)
      : Error(message), node_(node) {}

  // -1 when the failing subproblem is not tied to a node.
  int node() const { return node_; }

 private:
  int node_;
};

class OracleTooLargeError : public Error {
 public:
  using Error::Error;
};

}  // namespace beamflow

#endif  // BEAMFLOW_ERROR_H_
