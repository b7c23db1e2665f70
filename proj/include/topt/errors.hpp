#pragma once

#include <stdexcept>
#include <string>

namespace topt {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(w) {}
};

struct ControllabilityError : Error {
  explicit ControllabilityError(const std::string& w) : Error(w) {}
};

struct NotZeroDimensionalError : Error {
  explicit NotZeroDimensionalError(const std::string& w) : Error(w) {}
};

struct ResourceLimitError : Error {
  explicit ResourceLimitError(const std::string& w) : Error(w) {}
};

struct SolverStalledError : Error {
  explicit SolverStalledError(const std::string& w) : Error(w) {}
};

struct DeflationSingularityError : Error {
  explicit DeflationSingularityError(const std::string& w) : Error(w) {}
};

struct DegenerateDataError : Error {
  explicit DegenerateDataError(const std::string& w) : Error(w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(w) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(w) {}
};

}  // namespace topt
