#pragma once

#include <stdexcept>
#include <string>

namespace epicon {

// Raised when a scenario, network architecture, or training configuration is
// malformed (wrong dimensions, negative rates, missing fields, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a caller violates an API contract at runtime, e.g. stepping a
// finished episode or reporting more allowed travellers than were requested.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Raised when the dynamics themselves become impossible to advance, e.g. a
// mobility demand that asks more people to leave a region than live there.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace epicon
