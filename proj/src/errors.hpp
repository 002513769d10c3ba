#ifndef MCN_ERRORS_HPP
#define MCN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mcn {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration or input data; messages carry a JSON-pointer-style
/// path when the source is a config document.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Structurally invalid graph/schedule/problem (cycles, unreachable nodes,
/// degree mismatches, unscheduled edges).
class StructureError : public Error {
  public:
    using Error::Error;
};

/// A stage of the co-design has no solution; carries a human-readable
/// certificate of the violated requirement.
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

/// Combinatorial enumeration exceeded its budget.
class BudgetError : public Error {
  public:
    using Error::Error;
};

/// Numerical routine failed to converge or lost accuracy beyond tolerance.
class NumericalError : public Error {
  public:
    using Error::Error;
};

}  // namespace mcn

#endif
