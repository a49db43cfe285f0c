#pragma once

#include <stdexcept>
#include <string>

namespace tms {

/// Malformed or inconsistent configuration input.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory cannot be planned from the given geometry
/// (start inside the guard sphere, antipodal arc, ...).
struct PlanningError : std::runtime_error {
  explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tms
