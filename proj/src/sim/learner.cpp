#include "hhrl/sim/learner.hpp"

#include <algorithm>
#include <cmath>

#include "hhrl/core/errors.hpp"
#include "hhrl/rl/rewards.hpp"

namespace hhrl {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }
bool in_half_open_unit(double v) { return std::isfinite(v) && v >= 0.0 && v < 1.0; }

double theta(const LearnerProfile& profile, std::size_t game) {
  if (game >= profile.proficiency.size()) {
    throw ContractViolation("learner '" + profile.name + "' has no proficiency for game " + std::to_string(game));
  }
  return profile.proficiency[game];
}

}  // namespace

double LearnerProfile::difficulty(ChallengeLevel level) const {
  return static_cast<double>(level.value() - ChallengeLevel::kMin) * difficulty_step;
}

void LearnerProfile::validate(std::string_view path) const {
  const std::string p(path);
  if (proficiency.empty()) throw ConfigError(p + ".proficiency", "must list at least one value");
  for (std::size_t i = 0; i < proficiency.size(); ++i) {
    if (!in_unit(proficiency[i])) {
      throw ConfigError(p + ".proficiency[" + std::to_string(i) + "]", "must be in [0, 1]");
    }
  }
  if (!in_half_open_unit(slip)) throw ConfigError(p + ".slip", "must be in [0, 1)");
  if (!in_half_open_unit(guess)) throw ConfigError(p + ".guess", "must be in [0, 1)");
  if (!in_half_open_unit(help_propensity)) throw ConfigError(p + ".help_propensity", "must be in [0, 1)");
  if (!std::isfinite(growth_rate) || growth_rate < 0.0) throw ConfigError(p + ".growth_rate", "must be >= 0");
  for (std::size_t i = 0; i < feedback_response.size(); ++i) {
    const double m = feedback_response[i];
    if (!std::isfinite(m) || m < 0.5 || m > 1.5) {
      throw ConfigError(p + ".feedback_response[" + std::to_string(i) + "]", "must be in [0.5, 1.5]");
    }
  }
  if (!std::isfinite(difficulty_step) || difficulty_step <= 0.0 || difficulty_step > 0.25) {
    throw ConfigError(p + ".difficulty_step", "must be in (0, 0.25]");
  }
  if (!std::isfinite(zpd_center) || zpd_center <= 0.0 || zpd_center >= 1.0) {
    throw ConfigError(p + ".zpd_center", "must be in (0, 1)");
  }
  if (!std::isfinite(zpd_halfwidth) || zpd_halfwidth <= 0.0) {
    throw ConfigError(p + ".zpd_halfwidth", "must be > 0");
  }
}

void LearnerProfile::require_games(std::size_t games) const {
  if (proficiency.size() != games) {
    throw ConfigError("learner." + name + ".proficiency",
                      "expected " + std::to_string(games) + " values, got " + std::to_string(proficiency.size()));
  }
}

nlohmann::json to_json(const LearnerProfile& profile) {
  return {{"name", profile.name},
          {"proficiency", profile.proficiency},
          {"slip", profile.slip},
          {"guess", profile.guess},
          {"help_propensity", profile.help_propensity},
          {"growth_rate", profile.growth_rate},
          {"feedback_response", profile.feedback_response},
          {"difficulty_step", profile.difficulty_step},
          {"zpd_center", profile.zpd_center},
          {"zpd_halfwidth", profile.zpd_halfwidth}};
}

LearnerProfile learner_profile_from_json(const nlohmann::json& j) {
  LearnerProfile p;
  p.name = j.at("name").get<std::string>();
  p.proficiency = j.at("proficiency").get<std::vector<double>>();
  p.slip = j.value("slip", p.slip);
  p.guess = j.value("guess", p.guess);
  p.help_propensity = j.value("help_propensity", p.help_propensity);
  p.growth_rate = j.value("growth_rate", p.growth_rate);
  if (j.contains("feedback_response")) p.feedback_response = j.at("feedback_response").get<std::array<double, 5>>();
  p.difficulty_step = j.value("difficulty_step", p.difficulty_step);
  p.zpd_center = j.value("zpd_center", p.zpd_center);
  p.zpd_halfwidth = j.value("zpd_halfwidth", p.zpd_halfwidth);
  return p;
}

double correct_probability(const LearnerProfile& profile, std::size_t game, ChallengeLevel level,
                           std::optional<FeedbackLevel> last_feedback) {
  const double base = std::clamp(theta(profile, game) - profile.difficulty(level), 0.0, 1.0);
  double p = base * (1.0 - profile.slip) + (1.0 - base) * profile.guess;
  if (last_feedback) {
    p = std::clamp(p * profile.feedback_response[static_cast<std::size_t>(last_feedback->value() - 1)], 0.0, 1.0);
  }
  return p;
}

LearnerEvent respond(const LearnerProfile& profile, std::size_t game, ChallengeLevel level,
                     std::optional<FeedbackLevel> last_feedback, Rng& rng) {
  const double p = correct_probability(profile, game, level, last_feedback);
  const double help = profile.help_propensity * (1.0 - p);
  // One draw, ordered correct | help | mistake, so a higher p only ever turns
  // help or mistakes into correct answers.
  const double u = uniform_unit(rng);
  LearnerEvent event;
  if (u < p) {
    event.kind = LearnerEventKind::CorrectAnswer;
  } else if (u < p + help) {
    event.kind = LearnerEventKind::HelpRequest;
  } else {
    event.kind = LearnerEventKind::Mistake;
  }
  return event;
}

double zpd_proximity(const LearnerProfile& profile, std::size_t game, ChallengeLevel level) {
  const double unaided = theta(profile, game) - profile.difficulty(level);
  if (unaided <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - std::abs(unaided - profile.zpd_center) / profile.zpd_halfwidth);
}

void grow(LearnerProfile& profile, const GameAttempt& attempt) {
  if (!attempt.resolved()) throw ContractViolation("grow requires a resolved attempt");
  if (profile.stationary() || attempt.outcome() != AttemptOutcome::Completed) return;
  const double step = profile.growth_rate * zpd_proximity(profile, attempt.game(), attempt.level());
  auto& t = profile.proficiency.at(attempt.game());
  t = std::clamp(t + step, 0.0, 1.0);
}

GameAttempt simulate_attempt(const LearnerProfile& profile, std::size_t game, ChallengeLevel level,
                             int mistake_threshold, FeedbackLevel feedback, Rng& rng) {
  GameAttempt attempt(game, level, mistake_threshold);
  std::optional<FeedbackLevel> last;
  while (!attempt.resolved()) {
    switch (respond(profile, game, level, last, rng).kind) {
      case LearnerEventKind::CorrectAnswer:
        attempt.complete();
        break;
      case LearnerEventKind::Mistake:
        attempt.record_mistake();
        if (attempt.over_threshold()) {
          attempt.abandon();
        } else {
          last = feedback;
        }
        break;
      default:
        attempt.record_help_request();
        last = feedback;
        break;
    }
  }
  return attempt;
}

OracleResult oracle_optimal_loc(const LearnerProfile& profile, std::size_t game, const OracleOptions& options) {
  if (!profile.stationary()) throw ContractViolation("oracle requires a stationary learner");
  if (options.trials == 0) throw ContractViolation("oracle requires at least one trial");
  if (options.feedback.is_bail_out()) throw ContractViolation("oracle feedback must be a learned level");

  OracleResult result;
  for (std::size_t a = 0; a < ChallengeLevel::kCount; ++a) {
    const auto level = ChallengeLevel::from_action(a);
    // Same stream for every level and every profile: common random numbers.
    Rng rng(derive_seed(options.seed, game));
    double total = 0.0;
    for (std::size_t t = 0; t < options.trials; ++t) {
      const auto attempt = simulate_attempt(profile, game, level, options.mistake_threshold, options.feedback, rng);
      total += loc_reward(level, attempt.mistakes(), options.mistake_threshold);
    }
    result.expected_reward[a] = total / static_cast<double>(options.trials);
  }
  const auto best = std::max_element(result.expected_reward.begin(), result.expected_reward.end());
  result.best = ChallengeLevel::from_action(static_cast<std::size_t>(best - result.expected_reward.begin()));
  return result;
}

std::vector<OracleResult> oracle_policy(const LearnerProfile& profile, const OracleOptions& options) {
  std::vector<OracleResult> out;
  out.reserve(profile.proficiency.size());
  for (std::size_t g = 0; g < profile.proficiency.size(); ++g) out.push_back(oracle_optimal_loc(profile, g, options));
  return out;
}

SkillScores assess(const LearnerProfile& profile, std::span<const GameKind> catalog) {
  double sums[2] = {0.0, 0.0};
  std::size_t counts[2] = {0, 0};
  for (const auto& game : catalog) {
    const auto k = game.subtest == Subtest::NumericalOperations ? 0 : 1;
    sums[k] += theta(profile, game.id);
    ++counts[k];
  }
  auto scaled = [&](int k) { return counts[k] == 0 ? 0.0 : 100.0 * sums[k] / static_cast<double>(counts[k]); };
  return SkillScores{scaled(0), scaled(1)};
}

std::vector<LearnerProfile> builtin_presets(std::size_t games) {
  // Per-game spread around each learner's centre so games differ.
  static constexpr double kSpread[] = {0.0, 0.05, -0.05, 0.1, -0.1, 0.05, 0.0, -0.05, 0.1, -0.1};
  // Rounded to 3 decimals so presets read the same in a population file.
  auto tidy = [](double v) { return std::clamp(std::round(v * 1000.0) / 1000.0, 0.0, 1.0); };
  auto around = [games, tidy](double centre) {
    std::vector<double> theta(games);
    for (std::size_t g = 0; g < games; ++g) theta[g] = tidy(centre + kSpread[g % std::size(kSpread)]);
    return theta;
  };
  const std::array<double, 5> responsive{1.0, 1.05, 1.1, 1.2, 1.0};

  std::vector<LearnerProfile> presets;
  presets.push_back({"low", around(0.3), 0.1, 0.15, 0.15, 0.0, responsive});
  presets.push_back({"mid", around(0.55), 0.05, 0.1, 0.1, 0.0, responsive});
  presets.push_back({"high", around(0.85), 0.05, 0.1, 0.05, 0.0, responsive});
  presets.push_back({"high-help", around(0.5), 0.05, 0.1, 0.6, 0.0, responsive});

  std::vector<double> uneven(games);
  for (std::size_t g = 0; g < games; ++g) {
    uneven[g] = tidy(0.2 + 0.7 * static_cast<double>(g % 10) / 9.0);
  }
  presets.push_back({"uneven", uneven, 0.05, 0.1, 0.1, 0.0, responsive});

  presets.push_back({"fast-growth", around(0.35), 0.05, 0.1, 0.1, 0.02, responsive});
  presets.push_back({"steady-growth", around(0.5), 0.05, 0.1, 0.1, 0.01, responsive});
  return presets;
}

LearnerProfile builtin_preset(std::string_view name, std::size_t games) {
  for (auto& p : builtin_presets(games)) {
    if (p.name == name) return p;
  }
  throw ConfigError("learner", "unknown learner preset '" + std::string(name) + "'");
}

}  // namespace hhrl
