#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hhrl {

// A caller broke a documented precondition (out-of-range level, unresolved
// attempt passed to a close operation, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration could not be loaded or failed validation. `path()` names the
// offending field, e.g. "loc_rl.learning_rate".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// An event arrived that is not legal for the session's current phase.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An event log is missing records or carries inconsistent table updates.
class CorruptLogError : public std::runtime_error {
 public:
  CorruptLogError(std::uint64_t index, const std::string& message)
      : std::runtime_error(message), index_(index) {}

  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t index_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown intervention or session id.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The request conflicts with current state, e.g. a second active session.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hhrl
