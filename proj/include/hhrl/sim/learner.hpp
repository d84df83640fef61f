#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhrl/core/attempt.hpp"
#include "hhrl/core/game.hpp"
#include "hhrl/core/levels.hpp"
#include "hhrl/core/random.hpp"
#include "hhrl/core/session.hpp"

namespace hhrl {

// Simulated child. Correctness follows a slip/guess model over a per-game
// proficiency; feedback scales the next answer's correctness; completed games
// near the edge of the learner's ability raise proficiency.
//
// All constants here are simulator choices, not measured quantities.
struct LearnerProfile {
  std::string name;
  std::vector<double> proficiency;  // theta per game, in [0, 1]
  double slip = 0.05;
  double guess = 0.1;
  double help_propensity = 0.0;
  double growth_rate = 0.0;
  // Multiplier on the next answer's correctness after feedback level 1..5.
  std::array<double, 5> feedback_response{1.0, 1.0, 1.0, 1.0, 1.0};
  // Difficulty added per challenge level above 1.
  double difficulty_step = 0.2;
  // Growth is largest when unaided success chance (theta - difficulty) equals
  // zpd_center and vanishes zpd_halfwidth away from it.
  double zpd_center = 0.3;
  double zpd_halfwidth = 0.3;

  bool stationary() const { return growth_rate == 0.0; }
  double difficulty(ChallengeLevel level) const;
  // Throws ConfigError naming `path`.field on the first invalid value.
  void validate(std::string_view path = "learner") const;
  // Throws ConfigError unless there is one proficiency per catalog game.
  void require_games(std::size_t games) const;

  friend bool operator==(const LearnerProfile&, const LearnerProfile&) = default;
};

nlohmann::json to_json(const LearnerProfile& profile);
LearnerProfile learner_profile_from_json(const nlohmann::json& j);

// Probability of a correct answer before help requests are split off.
double correct_probability(const LearnerProfile& profile, std::size_t game, ChallengeLevel level,
                           std::optional<FeedbackLevel> last_feedback);

// One learner response during a game: CorrectAnswer with probability p',
// HelpRequest with probability help_propensity * (1 - p'), else Mistake.
LearnerEvent respond(const LearnerProfile& profile, std::size_t game, ChallengeLevel level,
                     std::optional<FeedbackLevel> last_feedback, Rng& rng);

// Growth weight in [0, 1] for a completed attempt at `level`.
double zpd_proximity(const LearnerProfile& profile, std::size_t game, ChallengeLevel level);

// Applies growth for a resolved attempt. Abandoned attempts and stationary
// profiles leave theta unchanged.
void grow(LearnerProfile& profile, const GameAttempt& attempt);

struct OracleResult {
  ChallengeLevel best{ChallengeLevel::kMin};
  std::array<double, ChallengeLevel::kCount> expected_reward{};
};

struct OracleOptions {
  int mistake_threshold = 5;
  std::size_t trials = 10'000;
  std::uint64_t seed = 0;
  // Feedback level given after every mistake or help request while scoring.
  FeedbackLevel feedback{2};
};

// Monte Carlo estimate of the expected challenge reward at every level for one
// game, and its argmax (lowest level on ties). Requires a stationary profile.
OracleResult oracle_optimal_loc(const LearnerProfile& profile, std::size_t game, const OracleOptions& options);

// Oracle for every game of the profile.
std::vector<OracleResult> oracle_policy(const LearnerProfile& profile, const OracleOptions& options);

// Plays one attempt to resolution against the profile, with a fixed feedback
// level after every mistake or help request. Used by the oracle.
GameAttempt simulate_attempt(const LearnerProfile& profile, std::size_t game, ChallengeLevel level,
                             int mistake_threshold, FeedbackLevel feedback, Rng& rng);

struct SkillScores {
  double numerical_operations = 0.0;
  double math_reasoning = 0.0;

  double mean() const { return 0.5 * (numerical_operations + math_reasoning); }

  friend bool operator==(const SkillScores&, const SkillScores&) = default;
};

// Mean theta over the games tagged with each subtest, scaled to [0, 100].
SkillScores assess(const LearnerProfile& profile, std::span<const GameKind> catalog);

// Shipped population: low/mid/high proficiency, high-help, uneven, and two
// growing learners.
std::vector<LearnerProfile> builtin_presets(std::size_t games = 10);
// Throws ConfigError if no preset has that name.
LearnerProfile builtin_preset(std::string_view name, std::size_t games = 10);

}  // namespace hhrl
