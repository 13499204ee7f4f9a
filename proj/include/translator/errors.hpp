#pragma once

#include <stdexcept>
#include <string>

namespace translator {

// Invalid user-supplied configuration (bad flags, malformed domains, ...).
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Evaluation outside the natural domain of a closed-form family.
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// An operation was applied to data it was not meant for.
struct UsageError : std::logic_error {
  explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// A numerical procedure could not reach its accuracy target.
struct AccuracyError : std::runtime_error {
  explicit AccuracyError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace translator
