#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hhrl/config.hpp"
#include "hhrl/core/errors.hpp"
#include "hhrl/sim/learner.hpp"

using namespace hhrl;

namespace {

LearnerProfile one_game(double theta, double slip, double guess) {
  LearnerProfile p;
  p.name = "t";
  p.proficiency = {theta};
  p.slip = slip;
  p.guess = guess;
  return p;
}

// Closed form for a learner without help requests or feedback effects: each
// response is correct with probability p, so the attempt stays within the
// allowance iff one of the first M+1 responses is correct.
double expected_loc_reward(double theta, double slip, double guess, double step, int level, int threshold) {
  const double base = std::clamp(theta - step * (level - 1), 0.0, 1.0);
  const double p = base * (1 - slip) + (1 - base) * guess;
  const double within = 1.0 - std::pow(1.0 - p, threshold + 1);
  return level * (2.0 * within - 1.0);
}

}  // namespace

TEST_SUITE("learner") {
  TEST_CASE("degenerate learners") {
    Rng rng(1);
    const auto perfect = one_game(1.0, 0.0, 0.0);
    const auto hopeless = one_game(0.0, 0.0, 0.0);
    for (int i = 0; i < 1000; ++i) {
      CHECK(respond(perfect, 0, ChallengeLevel(1), std::nullopt, rng).kind == LearnerEventKind::CorrectAnswer);
      CHECK(respond(hopeless, 0, ChallengeLevel(5), std::nullopt, rng).kind == LearnerEventKind::Mistake);
    }
  }

  TEST_CASE("correct-answer frequency matches the slip/guess closed form") {
    const auto p = one_game(0.7, 0.1, 0.2);
    const double expected = 0.5 * 0.9 + 0.5 * 0.2;  // 0.55
    CHECK(correct_probability(p, 0, ChallengeLevel(2), std::nullopt) == doctest::Approx(expected));
    Rng rng(2024);
    int correct = 0;
    for (int i = 0; i < 10000; ++i) {
      if (respond(p, 0, ChallengeLevel(2), std::nullopt, rng).kind == LearnerEventKind::CorrectAnswer) ++correct;
    }
    CHECK(std::abs(correct / 10000.0 - expected) < 0.03);
  }

  TEST_CASE("help requests split off the incorrect mass") {
    auto p = one_game(0.5, 0.0, 0.0);
    p.help_propensity = 0.4;
    Rng rng(5);
    int correct = 0, help = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto k = respond(p, 0, ChallengeLevel(1), std::nullopt, rng).kind;
      correct += k == LearnerEventKind::CorrectAnswer;
      help += k == LearnerEventKind::HelpRequest;
    }
    CHECK(std::abs(correct / double(n) - 0.5) < 0.02);
    CHECK(std::abs(help / double(n) - 0.2) < 0.02);
  }

  TEST_CASE("feedback response scales the next answer") {
    auto p = one_game(0.7, 0.1, 0.2);
    p.feedback_response = {1.2, 1.0, 0.8, 1.0, 1.0};
    const double base = correct_probability(p, 0, ChallengeLevel(2), std::nullopt);
    CHECK(correct_probability(p, 0, ChallengeLevel(2), FeedbackLevel(1)) == doctest::Approx(base * 1.2));
    CHECK(correct_probability(p, 0, ChallengeLevel(2), FeedbackLevel(3)) == doctest::Approx(base * 0.8));
  }

  TEST_CASE("growth is bounded and only follows completed attempts") {
    auto p = one_game(0.5, 0.05, 0.1);
    GameAttempt done(0, ChallengeLevel(2), 5);
    done.complete();
    const auto stationary = p;
    grow(p, done);
    CHECK(p == stationary);

    p.growth_rate = 0.01;
    for (int level = 1; level <= 5; ++level) {
      auto q = p;
      GameAttempt a(0, ChallengeLevel(level), 5);
      a.complete();
      grow(q, a);
      CHECK(q.proficiency[0] >= 0.5);
      CHECK(q.proficiency[0] <= 0.5 + 0.01 + 1e-15);
    }
    // Unaided chance 0.5 - 0.2 = 0.3 sits on the zpd centre: full step.
    auto q = p;
    grow(q, done);
    CHECK(q.proficiency[0] == doctest::Approx(0.51));

    GameAttempt dropped(0, ChallengeLevel(2), 5);
    for (int m = 0; m < 6; ++m) dropped.record_mistake();
    dropped.abandon();
    auto r = p;
    grow(r, dropped);
    CHECK(r.proficiency[0] == 0.5);

    GameAttempt open(0, ChallengeLevel(2), 5);
    CHECK_THROWS_AS(grow(r, open), ContractViolation);

    auto top = one_game(1.0, 0.05, 0.1);
    top.growth_rate = 0.5;
    top.zpd_center = 0.9;
    GameAttempt easy(0, ChallengeLevel(1), 5);
    easy.complete();
    grow(top, easy);
    CHECK(top.proficiency[0] <= 1.0);
  }

  TEST_CASE("oracle analytic limits") {
    OracleOptions o;
    o.trials = 2000;
    // A full-mastery learner never errs at level 1. With the default step the
    // level-5 base correctness is only 1 - 0.8, so the exact optimum is level 4;
    // the "level 5" limit holds once difficulty is negligible.
    const auto master = oracle_optimal_loc(one_game(1.0, 0.0, 0.0), 0, o);
    CHECK(master.expected_reward[0] == 1.0);
    CHECK(master.best.value() == 4);
    auto negligible = one_game(1.0, 0.0, 0.0);
    negligible.difficulty_step = 0.01;
    const auto easy = oracle_optimal_loc(negligible, 0, o);
    CHECK(easy.best.value() == 5);
    CHECK(easy.expected_reward[4] == 5.0);
    const auto none = oracle_optimal_loc(one_game(0.0, 0.0, 0.0), 0, o);
    CHECK(none.best.value() == 1);
    for (std::size_t a = 0; a < 5; ++a) CHECK(none.expected_reward[a] == -static_cast<double>(a + 1));
    auto growing = one_game(0.5, 0.05, 0.1);
    growing.growth_rate = 0.01;
    CHECK_THROWS_AS(oracle_optimal_loc(growing, 0, o), ContractViolation);
  }

  TEST_CASE("oracle agrees with the closed form") {
    const auto p = one_game(0.7, 0.05, 0.1);
    const auto r = oracle_optimal_loc(p, 0, OracleOptions{});
    std::size_t best = 0;
    double best_value = -1e9;
    for (int level = 1; level <= 5; ++level) {
      const double exact = expected_loc_reward(0.7, 0.05, 0.1, 0.2, level, 5);
      if (exact > best_value) {
        best_value = exact;
        best = static_cast<std::size_t>(level);
      }
      // 4 standard errors of a +-c Bernoulli mean over 10000 trials.
      const double se = 2.0 * level * 0.5 / std::sqrt(10000.0);
      CHECK(std::abs(r.expected_reward[static_cast<std::size_t>(level - 1)] - exact) < 4 * se);
    }
    CHECK(r.best.value() == static_cast<int>(best));
  }

  TEST_CASE("oracle regression fixture") {
    // Frozen from the reference build: theta 0.7, slip 0.05, guess 0.1,
    // difficulty step 0.2, 10000 trials, seed 0, feedback level 2.
    const auto r = oracle_optimal_loc(one_game(0.7, 0.05, 0.1), 0, OracleOptions{});
    CHECK(r.best.value() == 3);
    const std::array<double, 5> frozen{0.9984, 1.9532, 2.5818, 1.6184, -0.383};
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.expected_reward[i] == doctest::Approx(frozen[i]).epsilon(1e-9));
  }

  TEST_CASE("oracle expected reward is monotone in proficiency") {
    OracleOptions o;
    o.trials = 4000;
    for (int level = 1; level <= 5; ++level) {
      double prev = -10;
      for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const auto r = oracle_optimal_loc(one_game(theta, 0.05, 0.1), 0, o);
        const double v = r.expected_reward[static_cast<std::size_t>(level - 1)];
        // Shared streams keep the noise correlated; allow 4 standard errors.
        CHECK(v >= prev - 4 * 2.0 * level * 0.5 / std::sqrt(4000.0));
        prev = v;
      }
    }
  }

  TEST_CASE("assessment scores") {
    const auto catalog = default_game_catalog();
    LearnerProfile p;
    p.name = "a";
    p.proficiency.assign(10, 1.0);
    CHECK(assess(p, catalog) == SkillScores{100.0, 100.0});
    p.proficiency.assign(10, 0.0);
    CHECK(assess(p, catalog) == SkillScores{0.0, 0.0});
    p.proficiency.assign(10, 0.5);
    const auto half = assess(p, catalog);
    CHECK(half.numerical_operations == doctest::Approx(50.0));
    CHECK(half.math_reasoning == doctest::Approx(50.0));

    // Only NO games at 1: NO = 100, MR = 0.
    for (const auto& g : catalog) p.proficiency[g.id] = g.subtest == Subtest::NumericalOperations ? 1.0 : 0.0;
    const auto split = assess(p, catalog);
    CHECK(split.numerical_operations == doctest::Approx(100.0));
    CHECK(split.math_reasoning == doctest::Approx(0.0));
  }

  TEST_CASE("profile validation names the field") {
    auto p = one_game(0.5, 0.05, 0.1);
    p.slip = 1.0;
    try {
      p.validate();
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.path() == "learner.slip");
    }
    p = one_game(1.5, 0.05, 0.1);
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = one_game(0.5, 0.05, 0.1);
    CHECK_THROWS_AS(p.require_games(10), ConfigError);
  }

  TEST_CASE("built-in presets") {
    const auto presets = builtin_presets();
    REQUIRE(presets.size() == 7);
    int stationary = 0;
    for (const auto& p : presets) {
      CHECK_NOTHROW(p.validate());
      CHECK(p.proficiency.size() == 10);
      stationary += p.stationary();
      CHECK(learner_profile_from_json(to_json(p)) == p);
    }
    CHECK(stationary == 5);
    CHECK(builtin_preset("mid").name == "mid");
    CHECK_THROWS_AS(builtin_preset("nobody"), ConfigError);
  }

  TEST_CASE("shipped population file matches the built-ins") {
    const auto file = load_population(std::filesystem::path(HHRL_SOURCE_DIR) / "presets" / "learners.yaml");
    CHECK(file == builtin_presets());
  }
}
