#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "hhrl/control/scripts.hpp"
#include "hhrl/core/attempt.hpp"
#include "hhrl/core/game.hpp"
#include "hhrl/core/session.hpp"
#include "hhrl/rl/q_table.hpp"

namespace hhrl {

enum class TableId { Challenge, Feedback };

std::string_view to_string(TableId table);
TableId table_id_from_string(std::string_view text);

// Everything the controllers need that does not change within an intervention.
struct ControllerConfig {
  GameCatalog catalog = default_game_catalog();
  std::size_t games_per_session = 10;
  int mistake_threshold = 5;
  RlParams loc_params;
  RlParams lof_params;
  // Challenge levels the instruction controller may pick, inclusive.
  int challenge_min = ChallengeLevel::kMin;
  int challenge_max = ChallengeLevel::kMax;
  std::size_t inquiries_per_session = 1;
  ScriptCatalog scripts = ScriptCatalog::defaults();
  HintCatalog hints = HintCatalog::defaults();

  // Throws ConfigError with the offending field path.
  void validate() const;
  ActionRange challenge_actions() const;
};

// The two learned tables of one intervention. They outlive sessions.
struct Personalization {
  QTable challenge;
  QTable feedback;

  static Personalization fresh(const ControllerConfig& config);
  const QTable& table(TableId id) const { return id == TableId::Challenge ? challenge : feedback; }
  QTable& table(TableId id) { return id == TableId::Challenge ? challenge : feedback; }

  friend bool operator==(const Personalization&, const Personalization&) = default;
};

// One applied Q-learning backup.
struct EpisodeUpdate {
  TableId table = TableId::Challenge;
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::optional<std::size_t> next_state;
  double old_value = 0.0;
  double new_value = 0.0;

  friend bool operator==(const EpisodeUpdate&, const EpisodeUpdate&) = default;
};

// Instruction controller: chooses the challenge level per game and learns it.
// At most one challenge episode is pending at a time.
class InstructionController {
 public:
  InstructionController(RlParams params, ActionRange range, int mistake_threshold);

  ChallengeLevel choose(const QTable& table, const GameKind& game, Rng& rng);
  // Applies the challenge reward for the pending episode. The attempt must be
  // resolved and match the pending (game, level).
  EpisodeUpdate close(QTable& table, const GameAttempt& attempt, std::optional<std::size_t> next_state);
  void discard() { pending_.reset(); }
  bool pending() const { return pending_.has_value(); }

 private:
  struct Pending {
    std::size_t state;
    std::size_t action;
  };

  RlParams params_;
  ActionRange range_;
  int threshold_;
  std::optional<Pending> pending_;
};

struct FeedbackChoice {
  FeedbackLevel level;
  SarAct act;
};

// Feedback controller: picks a graded cue after each mistake or help request.
// Once the attempt is over its mistake allowance the bail-out level is forced
// and the attempt is abandoned; that choice opens no episode.
class FeedbackController {
 public:
  FeedbackController(RlParams params, int mistake_threshold, HintCatalog hints);

  FeedbackChoice choose(const QTable& table, GameAttempt& attempt, Rng& rng);
  // Rewards the pending feedback with the attempt's current counts. Throws
  // ContractViolation if nothing is pending.
  EpisodeUpdate close(QTable& table, const GameAttempt& attempt, std::optional<std::size_t> next_state);
  void discard() { pending_.reset(); }
  bool pending() const { return pending_.has_value(); }

 private:
  struct Pending {
    std::size_t state;
    std::size_t action;
  };

  RlParams params_;
  int threshold_;
  HintCatalog hints_;
  std::optional<Pending> pending_;
};

enum class ActiveController { None, Disclosure, Promise, Instruction, Feedback, Inquiry };

using StepRecord = std::variant<SarAct, EpisodeUpdate, GameAttempt>;

// What one meta-controller step produced, in order of occurrence.
struct StepOutput {
  std::vector<StepRecord> records;

  std::vector<SarAct> acts() const;
  std::vector<EpisodeUpdate> updates() const;
};

// Session-level finite-state machine over the five controllers. One instance
// drives one session; the learned tables move in at construction and can be
// taken back out afterwards for the next session.
class MetaController {
 public:
  MetaController(ControllerConfig config, Personalization tables, std::size_t session_index,
                 ScriptController::Memory script_memory = {});

  // Advances the session by one learner event. Throws ProtocolError, leaving
  // the controller untouched, if the event is not legal in the current phase.
  StepOutput step(const LearnerEvent& event, Rng& rng);

  // Operator-initiated early end. A pending challenge episode is rewarded
  // only if the attempt is already over its mistake allowance; pending
  // feedback is discarded.
  StepOutput terminate();

  bool accepts(LearnerEventKind kind) const;

  SessionPhase phase() const { return phase_; }
  ActiveController active() const { return active_; }
  std::size_t session_index() const { return session_index_; }
  const std::vector<GameKind>& plan() const { return plan_; }
  std::size_t games_started() const { return next_game_; }
  const std::optional<GameAttempt>& attempt() const { return attempt_; }
  const Personalization& tables() const { return tables_; }
  Personalization take_tables() && { return std::move(tables_); }
  const ScriptController::Memory& script_memory() const { return scripts_.memory(); }

 private:
  void open_session(StepOutput& out, Rng& rng);
  void begin_next_game(StepOutput& out, Rng& rng);
  void finish_attempt(StepOutput& out, Rng& rng);
  void close_pending_feedback(StepOutput& out);
  void give_feedback(StepOutput& out, Rng& rng);
  void emit(StepOutput& out, SarAct act);
  std::optional<std::size_t> next_game_state() const;

  ControllerConfig config_;
  Personalization tables_;
  std::size_t session_index_;
  SessionPhase phase_ = SessionPhase::OpeningDisclosure;
  ActiveController active_ = ActiveController::None;
  std::vector<GameKind> plan_;
  std::size_t next_game_ = 0;
  std::optional<GameAttempt> attempt_;
  std::size_t inquiries_left_ = 0;
  InstructionController instruction_;
  FeedbackController feedback_;
  ScriptController scripts_;
};

// Session plan of `count` games: whole-catalog permutations concatenated and
// truncated, so every game appears once per catalog-sized block.
std::vector<GameKind> plan_games(const GameCatalog& catalog, std::size_t count, Rng& rng);

}  // namespace hhrl
