#include "hhrl/core/levels.hpp"

#include <string>

#include "hhrl/core/errors.hpp"

namespace hhrl {

ChallengeLevel::ChallengeLevel(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw ContractViolation("challenge level out of range [1,5]: " + std::to_string(value));
  }
}

ChallengeLevel ChallengeLevel::from_action(std::size_t action) {
  return ChallengeLevel(static_cast<int>(action) + kMin);
}

FeedbackLevel::FeedbackLevel(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw ContractViolation("feedback level out of range [1,5]: " + std::to_string(value));
  }
}

FeedbackLevel FeedbackLevel::from_action(std::size_t action) {
  if (action >= kLearnedCount) {
    throw ContractViolation("feedback action out of learned range: " + std::to_string(action));
  }
  return FeedbackLevel(static_cast<int>(action) + kMin);
}

std::size_t FeedbackLevel::action() const {
  if (is_bail_out()) throw ContractViolation("bail-out feedback is outside the learned action space");
  return static_cast<std::size_t>(value_ - kMin);
}

}  // namespace hhrl
