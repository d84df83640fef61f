#include "hhrl/core/attempt.hpp"

#include <string>

#include "hhrl/core/errors.hpp"

namespace hhrl {

std::string_view to_string(AttemptOutcome outcome) {
  switch (outcome) {
    case AttemptOutcome::InProgress: return "in_progress";
    case AttemptOutcome::Completed: return "completed";
    case AttemptOutcome::Abandoned: return "abandoned";
  }
  return "in_progress";
}

AttemptOutcome attempt_outcome_from_string(std::string_view text) {
  if (text == "in_progress") return AttemptOutcome::InProgress;
  if (text == "completed") return AttemptOutcome::Completed;
  if (text == "abandoned") return AttemptOutcome::Abandoned;
  throw ConfigError("outcome", "unknown attempt outcome '" + std::string(text) + "'");
}

GameAttempt::GameAttempt(std::size_t game, ChallengeLevel level, int mistake_threshold)
    : game_(game), level_(level), threshold_(mistake_threshold) {
  if (mistake_threshold < 0) throw ContractViolation("mistake threshold must be >= 0");
}

void GameAttempt::require_in_progress(const char* op) const {
  if (resolved()) throw ContractViolation(std::string(op) + " on a resolved attempt");
}

void GameAttempt::record_mistake() {
  require_in_progress("record_mistake");
  if (over_threshold()) throw ContractViolation("mistake recorded after the allowance was exceeded");
  ++mistakes_;
}

void GameAttempt::record_help_request() {
  require_in_progress("record_help_request");
  if (over_threshold()) throw ContractViolation("help request after the allowance was exceeded");
  ++help_requests_;
}

void GameAttempt::complete() {
  require_in_progress("complete");
  if (over_threshold()) throw ContractViolation("cannot complete an attempt over the mistake allowance");
  outcome_ = AttemptOutcome::Completed;
}

void GameAttempt::abandon() {
  require_in_progress("abandon");
  if (mistakes_ != threshold_ + 1) {
    throw ContractViolation("an attempt is abandoned only on mistake M+1");
  }
  outcome_ = AttemptOutcome::Abandoned;
}

}  // namespace hhrl
