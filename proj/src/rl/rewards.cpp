#include "hhrl/rl/rewards.hpp"

#include "hhrl/core/errors.hpp"

namespace hhrl {

namespace {

void require_counts(int mistakes, int threshold) {
  if (mistakes < 0) throw ContractViolation("mistake count must be >= 0");
  if (threshold < 0) throw ContractViolation("mistake threshold must be >= 0");
}

}  // namespace

int loc_reward(ChallengeLevel level, int mistakes, int mistake_threshold) {
  require_counts(mistakes, mistake_threshold);
  const int within = mistakes <= mistake_threshold ? 1 : -1;
  return level.value() * within;
}

double lof_reward(FeedbackLevel level, int mistakes, int help_requests, int mistake_threshold) {
  require_counts(mistakes, mistake_threshold);
  if (help_requests < 0) throw ContractViolation("help request count must be >= 0");
  if (level.is_bail_out()) throw ContractViolation("bail-out feedback carries no reward");
  const double bonus = mistakes <= mistake_threshold ? 5.0 : 0.0;
  return -static_cast<double>(level.value()) / static_cast<double>(mistakes + help_requests + 1) + bonus;
}

double lof_reward_min(int mistake_threshold) {
  return -static_cast<double>(FeedbackLevel::kMaxLearned) / static_cast<double>(mistake_threshold + 2);
}

double normalize_lof_reward(double reward, int mistake_threshold) {
  const double lo = lof_reward_min(mistake_threshold);
  return (reward - lo) / (kLofRewardSup - lo);
}

}  // namespace hhrl
