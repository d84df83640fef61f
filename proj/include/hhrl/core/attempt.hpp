#pragma once

#include <cstddef>
#include <string_view>

#include "hhrl/core/levels.hpp"

namespace hhrl {

enum class AttemptOutcome { InProgress, Completed, Abandoned };

std::string_view to_string(AttemptOutcome outcome);
AttemptOutcome attempt_outcome_from_string(std::string_view text);

// One play-through of one game at one challenge level. The attempt may absorb
// up to `mistake_threshold` mistakes; the next one exceeds the allowance and
// the attempt can then only be abandoned. Outcomes never revert to InProgress.
class GameAttempt {
 public:
  GameAttempt(std::size_t game, ChallengeLevel level, int mistake_threshold);

  std::size_t game() const { return game_; }
  ChallengeLevel level() const { return level_; }
  int mistake_threshold() const { return threshold_; }
  int mistakes() const { return mistakes_; }
  int help_requests() const { return help_requests_; }
  AttemptOutcome outcome() const { return outcome_; }

  bool resolved() const { return outcome_ != AttemptOutcome::InProgress; }
  bool over_threshold() const { return mistakes_ > threshold_; }

  // Each of these throws ContractViolation if the attempt is already resolved
  // or if the transition would break the mistake-count invariants.
  void record_mistake();
  void record_help_request();
  void complete();
  void abandon();

 private:
  void require_in_progress(const char* op) const;

  std::size_t game_;
  ChallengeLevel level_;
  int threshold_;
  int mistakes_ = 0;
  int help_requests_ = 0;
  AttemptOutcome outcome_ = AttemptOutcome::InProgress;
};

}  // namespace hhrl
