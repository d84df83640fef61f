#include <doctest.h>

#include <algorithm>
#include <regex>
#include <set>

#include "hhrl/control/controllers.hpp"
#include "hhrl/control/scripts.hpp"
#include "hhrl/core/errors.hpp"

using namespace hhrl;

namespace {

RlParams greedy_params() {
  RlParams p;
  p.epsilon = 0.0;
  p.epsilon_min = 0.0;
  return p;
}

// One letter per act: D disclosure, P opening promise, I instruction,
// F feedback, Q promise fulfillment, N inquiry.
char act_letter(const SarAct& act) {
  switch (act.category) {
    case ActCategory::Disclosure: return 'D';
    case ActCategory::Promise: return act.is_promise_fulfillment() ? 'Q' : 'P';
    case ActCategory::Instruction: return 'I';
    case ActCategory::Feedback: return 'F';
    case ActCategory::Inquiry: return 'N';
  }
  return '?';
}

bool matches_session_grammar(const std::string& trace, std::size_t games) {
  const std::regex grammar("DP(IF*){" + std::to_string(games) + "}QN+");
  return std::regex_match(trace, grammar);
}

// Drives one session with a random legal learner; returns the act trace.
std::string random_session(MetaController& meta, Rng& rng, Rng& learner) {
  std::string trace;
  auto take = [&](const StepOutput& out) {
    for (const auto& a : out.acts()) trace.push_back(act_letter(a));
  };
  take(meta.step({LearnerEventKind::SessionStart, 0, {}}, rng));
  while (meta.phase() != SessionPhase::Ended) {
    LearnerEventKind kind = LearnerEventKind::InquiryResponse;
    if (meta.phase() == SessionPhase::GameLoop) {
      const auto u = uniform_index(learner, 10);
      kind = u < 3 ? LearnerEventKind::CorrectAnswer : (u < 8 ? LearnerEventKind::Mistake : LearnerEventKind::HelpRequest);
    }
    take(meta.step({kind, 0, {}}, rng));
  }
  return trace;
}

}  // namespace

TEST_SUITE("controllers") {
  TEST_CASE("instruction controller maps the row argmax to a level") {
    QTable table(10, 5);
    table.store(3, 4, 1.0);
    InstructionController ic(greedy_params(), ActionRange{0, 4}, 5);
    Rng rng(1);
    GameKind game{3, "g", "d", Subtest::NumericalOperations};
    CHECK(ic.choose(table, game, rng).value() == 5);
  }

  TEST_CASE("instruction controller on an all-zero table picks uniformly") {
    QTable table(10, 5);
    std::vector<std::size_t> counts(5, 0);
    GameKind game{0, "g", "d", Subtest::NumericalOperations};
    for (std::uint64_t seed = 0; seed < 5000; ++seed) {
      InstructionController ic(greedy_params(), ActionRange{0, 4}, 5);
      Rng rng(seed);
      ++counts[ic.choose(table, game, rng).action()];
    }
    for (auto c : counts) CHECK(c > 800);
  }

  TEST_CASE("instruction close applies the challenge reward") {
    struct Case {
      int level;
      int mistakes;
      bool complete;
      double reward;
    };
    for (const auto& c : {Case{4, 0, true, 4.0}, Case{4, 6, false, -4.0}, Case{1, 5, true, 1.0}}) {
      QTable table(10, 5);
      table.store(2, static_cast<std::size_t>(c.level - 1), 1.0);
      InstructionController ic(greedy_params(), ActionRange{0, 4}, 5);
      Rng rng(1);
      const GameKind game{2, "g", "d", Subtest::NumericalOperations};
      REQUIRE(ic.choose(table, game, rng).value() == c.level);
      GameAttempt attempt(2, ChallengeLevel(c.level), 5);
      for (int m = 0; m < c.mistakes; ++m) attempt.record_mistake();
      if (c.complete) {
        attempt.complete();
      } else {
        attempt.abandon();
      }
      const auto u = ic.close(table, attempt, std::nullopt);
      CHECK(u.reward == c.reward);
      CHECK(u.table == TableId::Challenge);
      CHECK(u.new_value == doctest::Approx(1.0 + 0.1 * (c.reward - 1.0)));
      CHECK_FALSE(ic.pending());
    }
  }

  TEST_CASE("instruction close rejects unresolved attempts") {
    QTable table(10, 5);
    InstructionController ic(greedy_params(), ActionRange{0, 0}, 5);
    Rng rng(1);
    ic.choose(table, GameKind{0, "g", "d", Subtest::NumericalOperations}, rng);
    GameAttempt attempt(0, ChallengeLevel(1), 5);
    CHECK_THROWS_AS(ic.close(table, attempt, std::nullopt), ContractViolation);
  }

  TEST_CASE("feedback bail-out on mistake M+1") {
    QTable table(10, 4);
    FeedbackController fc(greedy_params(), 5, HintCatalog::defaults());
    GameAttempt attempt(0, ChallengeLevel(3), 5);
    for (int m = 0; m < 6; ++m) attempt.record_mistake();
    Rng rng(1);
    const auto choice = fc.choose(table, attempt, rng);
    CHECK(choice.level.is_bail_out());
    CHECK(choice.act.utterance == "Let's try something else.");
    CHECK(attempt.outcome() == AttemptOutcome::Abandoned);
    CHECK_FALSE(fc.pending());
    CHECK(table.total_visits() == 0);
    CHECK_THROWS_AS(fc.close(table, attempt, std::nullopt), ContractViolation);
  }

  TEST_CASE("feedback within the allowance never bails out") {
    QTable table(10, 4);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      FeedbackController fc(greedy_params(), 5, HintCatalog::defaults());
      GameAttempt attempt(0, ChallengeLevel(1), 5);
      attempt.record_mistake();
      Rng rng(seed);
      const auto choice = fc.choose(table, attempt, rng);
      CHECK(choice.level.value() >= 1);
      CHECK(choice.level.value() <= 4);
    }
  }

  TEST_CASE("feedback follows the row argmax with its hint") {
    QTable table(10, 4);
    table.store(0, 1, 2.0);
    FeedbackController fc(greedy_params(), 5, HintCatalog::defaults());
    GameAttempt attempt(0, ChallengeLevel(1), 5);
    attempt.record_mistake();
    attempt.record_mistake();
    Rng rng(1);
    const auto choice = fc.choose(table, attempt, rng);
    CHECK(choice.level.value() == 2);
    CHECK(choice.act.utterance.rfind("Try counting out loud", 0) == 0);
    const auto& payload = std::get<FeedbackPayload>(choice.act.payload);
    CHECK(payload.hint == choice.act.utterance);
  }

  TEST_CASE("feedback close applies the feedback reward") {
    struct Case {
      int level;
      int mistakes;
      int helps;
      double reward;
    };
    for (const auto& c : {Case{1, 1, 0, 4.5}, Case{3, 6, 2, -1.0 / 3.0}}) {
      QTable table(10, 4);
      table.store(4, static_cast<std::size_t>(c.level - 1), 1.0);
      FeedbackController fc(greedy_params(), 5, HintCatalog::defaults());
      GameAttempt attempt(4, ChallengeLevel(1), 5);
      attempt.record_mistake();
      Rng rng(1);
      REQUIRE(fc.choose(table, attempt, rng).level.value() == c.level);
      for (int h = 0; h < c.helps; ++h) attempt.record_help_request();
      for (int m = 1; m < c.mistakes; ++m) attempt.record_mistake();
      const auto u = fc.close(table, attempt, std::nullopt);
      CHECK(std::abs(u.reward - c.reward) < 1e-12);
      CHECK(u.table == TableId::Feedback);
    }
  }

  TEST_CASE("opening a session emits disclosure, promise, instruction") {
    const ControllerConfig config;
    MetaController meta(config, Personalization::fresh(config), 0);
    Rng rng(5);
    const auto out = meta.step({LearnerEventKind::SessionStart, 0, {}}, rng);
    const auto acts = out.acts();
    REQUIRE(acts.size() == 3);
    CHECK(acts[0].category == ActCategory::Disclosure);
    CHECK(acts[1].category == ActCategory::Promise);
    CHECK(acts[2].category == ActCategory::Instruction);
    CHECK(meta.phase() == SessionPhase::GameLoop);
    CHECK(meta.plan().size() == 10);
    CHECK(meta.games_started() == 1);
  }

  TEST_CASE("finishing the last game closes with fulfillment and inquiry") {
    const ControllerConfig config;
    MetaController meta(config, Personalization::fresh(config), 0);
    Rng rng(5);
    meta.step({LearnerEventKind::SessionStart, 0, {}}, rng);
    StepOutput last;
    for (int g = 0; g < 10; ++g) last = meta.step({LearnerEventKind::CorrectAnswer, 0, {}}, rng);
    const auto acts = last.acts();
    REQUIRE(acts.size() == 2);
    CHECK(acts[0].is_promise_fulfillment());
    CHECK(acts[1].category == ActCategory::Inquiry);
    CHECK(meta.phase() == SessionPhase::ClosingInquiry);
    meta.step({LearnerEventKind::InquiryResponse, 0, "I like pizza"}, rng);
    CHECK(meta.phase() == SessionPhase::Ended);
    CHECK(meta.tables().challenge.total_visits() == 10);
  }

  TEST_CASE("illegal events raise a protocol error and change nothing") {
    const ControllerConfig config;
    MetaController meta(config, Personalization::fresh(config), 0);
    Rng rng(5);
    CHECK_THROWS_AS(meta.step({LearnerEventKind::CorrectAnswer, 0, {}}, rng), ProtocolError);
    CHECK(meta.phase() == SessionPhase::OpeningDisclosure);
    meta.step({LearnerEventKind::SessionStart, 0, {}}, rng);
    CHECK_THROWS_AS(meta.step({LearnerEventKind::SessionStart, 0, {}}, rng), ProtocolError);
    CHECK_THROWS_AS(meta.step({LearnerEventKind::InquiryResponse, 0, {}}, rng), ProtocolError);

    for (int g = 0; g < 10; ++g) meta.step({LearnerEventKind::CorrectAnswer, 0, {}}, rng);
    meta.step({LearnerEventKind::InquiryResponse, 0, {}}, rng);
    REQUIRE(meta.phase() == SessionPhase::Ended);
    const auto tables = meta.tables();
    const Rng before = rng;
    for (auto kind : {LearnerEventKind::SessionStart, LearnerEventKind::CorrectAnswer, LearnerEventKind::Mistake,
                      LearnerEventKind::HelpRequest, LearnerEventKind::InquiryResponse}) {
      CHECK_THROWS_AS(meta.step({kind, 0, {}}, rng), ProtocolError);
    }
    CHECK(meta.phase() == SessionPhase::Ended);
    CHECK(meta.tables() == tables);
    CHECK(rng == before);
  }

  TEST_CASE("six mistakes force the bail-out and move on") {
    const ControllerConfig config;
    MetaController meta(config, Personalization::fresh(config), 0);
    Rng rng(8);
    meta.step({LearnerEventKind::SessionStart, 0, {}}, rng);
    for (int m = 0; m < 5; ++m) {
      const auto acts = meta.step({LearnerEventKind::Mistake, 0, {}}, rng).acts();
      REQUIRE(acts.size() == 1);
      CHECK(std::get<FeedbackPayload>(acts[0].payload).level.value() <= 4);
    }
    const auto out = meta.step({LearnerEventKind::Mistake, 0, {}}, rng);
    const auto acts = out.acts();
    REQUIRE(acts.size() == 2);
    CHECK(std::get<FeedbackPayload>(acts[0].payload).level.is_bail_out());
    CHECK(acts[0].utterance == "Let's try something else.");
    CHECK(acts[1].category == ActCategory::Instruction);
    // Pending feedback from mistake 5 closes, then the challenge episode.
    const auto updates = out.updates();
    REQUIRE(updates.size() == 2);
    CHECK(updates[0].table == TableId::Feedback);
    CHECK(updates[1].table == TableId::Challenge);
    CHECK(updates[1].reward < 0);
    CHECK(meta.games_started() == 2);
  }

  TEST_CASE("zero mistake allowance bails out on every mistake") {
    ControllerConfig config;
    config.mistake_threshold = 0;
    MetaController meta(config, Personalization::fresh(config), 0);
    Rng rng(8);
    meta.step({LearnerEventKind::SessionStart, 0, {}}, rng);
    for (int g = 0; g < 10; ++g) {
      const auto acts = meta.step({LearnerEventKind::Mistake, 0, {}}, rng).acts();
      REQUIRE_FALSE(acts.empty());
      CHECK(std::get<FeedbackPayload>(acts[0].payload).level.is_bail_out());
    }
    CHECK(meta.phase() == SessionPhase::ClosingInquiry);
    CHECK(meta.tables().feedback.total_visits() == 0);
  }

  TEST_CASE("random legal sessions follow the act grammar") {
    ControllerConfig config;
    Personalization tables = Personalization::fresh(config);
    ScriptController::Memory memory;
    Rng learner(77);
    for (std::size_t s = 0; s < 200; ++s) {
      config.games_per_session = 1 + s % 13;
      config.inquiries_per_session = 1 + s % 3;
      MetaController meta(config, std::move(tables), s, memory);
      Rng rng(derive_seed(3, s));
      const auto trace = random_session(meta, rng, learner);
      CHECK_MESSAGE(matches_session_grammar(trace, config.games_per_session), trace);
      CHECK(std::count(trace.begin(), trace.end(), 'N') == static_cast<long>(config.inquiries_per_session));
      memory = meta.script_memory();
      tables = std::move(meta).take_tables();
    }
  }

  TEST_CASE("the grammar checker rejects broken traces") {
    CHECK(matches_session_grammar("DPIIFQN", 2));
    CHECK_FALSE(matches_session_grammar("DPIFQN", 2));
    CHECK_FALSE(matches_session_grammar("PDIIQN", 2));
    CHECK_FALSE(matches_session_grammar("DPIIN", 2));
    CHECK_FALSE(matches_session_grammar("DPFIIQN", 2));
  }

  TEST_CASE("terminate rewards an over-allowance attempt only") {
    ControllerConfig config;
    MetaController meta(config, Personalization::fresh(config), 0);
    Rng rng(2);
    meta.step({LearnerEventKind::SessionStart, 0, {}}, rng);
    meta.step({LearnerEventKind::Mistake, 0, {}}, rng);
    const auto out = meta.terminate();
    CHECK(out.updates().empty());
    CHECK(meta.phase() == SessionPhase::Ended);
    CHECK(meta.tables().challenge.total_visits() == 0);
    CHECK(meta.terminate().records.empty());
  }

  TEST_CASE("session plans cover the catalog in blocks") {
    const auto catalog = default_game_catalog();
    Rng rng(4);
    const auto plan = plan_games(catalog, 25, rng);
    REQUIRE(plan.size() == 25);
    for (std::size_t block = 0; block < 2; ++block) {
      std::set<std::size_t> ids;
      for (std::size_t i = 0; i < 10; ++i) ids.insert(plan[block * 10 + i].id);
      CHECK(ids.size() == 10);
    }
  }

  TEST_CASE("scripts") {
    ScriptController scripts(ScriptCatalog::defaults());
    Rng rng(1);
    const ScriptContext ctx{0, 10};
    const auto planet = scripts.planet_for(0);
    for (int i = 0; i < 20; ++i) {
      const auto disclosure = scripts.act(ScriptKind::Disclosure, ctx, rng);
      CHECK(disclosure.category == ActCategory::Disclosure);
      CHECK(disclosure.utterance.find("help") != std::string::npos);
      CHECK(disclosure.utterance.find(planet) != std::string::npos);
    }
    for (const auto& line : ScriptCatalog::defaults().disclosures) CHECK(line.find("help") != std::string::npos);
    for (int i = 0; i < 20; ++i) {
      const auto promise = scripts.act(ScriptKind::Promise, ctx, rng);
      CHECK(promise.utterance.find("all the games") != std::string::npos);
      CHECK(promise.utterance.find('{') == std::string::npos);
    }
    const auto inquiry = scripts.act(ScriptKind::Inquiry, ctx, rng);
    CHECK(inquiry.category == ActCategory::Inquiry);
    CHECK(inquiry.utterance.back() == '?');

    // No immediate repeats within a kind.
    std::string prev;
    for (int i = 0; i < 50; ++i) {
      const auto a = scripts.act(ScriptKind::Inquiry, ctx, rng).utterance;
      CHECK(a != prev);
      prev = a;
    }

    ScriptCatalog empty = ScriptCatalog::defaults();
    empty.inquiries.clear();
    CHECK_THROWS_AS(empty.validate(), ConfigError);
  }
}
