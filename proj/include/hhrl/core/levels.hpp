#pragma once

#include <compare>
#include <cstddef>

namespace hhrl {

// Instruction challenge level, 1 (easiest) through 5 (hardest).
class ChallengeLevel {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 5;
  static constexpr std::size_t kCount = kMax - kMin + 1;

  // Throws ContractViolation outside [1, 5].
  explicit ChallengeLevel(int value);

  static ChallengeLevel from_action(std::size_t action);

  int value() const { return value_; }
  std::size_t action() const { return static_cast<std::size_t>(value_ - kMin); }

  friend auto operator<=>(const ChallengeLevel&, const ChallengeLevel&) = default;

 private:
  int value_;
};

// Graded-cueing feedback level. Levels 1-4 are chosen by the learned policy;
// level 5 is the bail-out issued when a game exceeds its mistake allowance.
class FeedbackLevel {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 5;
  static constexpr int kMaxLearned = 4;
  static constexpr int kBailOut = 5;
  static constexpr std::size_t kLearnedCount = kMaxLearned - kMin + 1;

  explicit FeedbackLevel(int value);

  static FeedbackLevel from_action(std::size_t action);
  static FeedbackLevel bail_out() { return FeedbackLevel(kBailOut); }

  int value() const { return value_; }
  bool is_bail_out() const { return value_ == kBailOut; }
  // Index into the learned action space; ContractViolation for the bail-out.
  std::size_t action() const;

  friend auto operator<=>(const FeedbackLevel&, const FeedbackLevel&) = default;

 private:
  int value_;
};

}  // namespace hhrl
