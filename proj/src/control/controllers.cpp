#include "hhrl/control/controllers.hpp"

#include <string>
#include <utility>

#include "hhrl/core/errors.hpp"
#include "hhrl/rl/rewards.hpp"

namespace hhrl {

std::string_view to_string(TableId table) { return table == TableId::Challenge ? "loc" : "lof"; }

TableId table_id_from_string(std::string_view text) {
  if (text == "loc") return TableId::Challenge;
  if (text == "lof") return TableId::Feedback;
  throw ConfigError("table", "unknown table id '" + std::string(text) + "'");
}

void ControllerConfig::validate() const {
  validate_catalog(catalog);
  if (games_per_session == 0) throw ConfigError("games_per_session", "must be >= 1");
  if (mistake_threshold < 0) throw ConfigError("mistake_threshold", "must be >= 0");
  loc_params.validate("loc_rl");
  lof_params.validate("lof_rl");
  if (challenge_min < ChallengeLevel::kMin || challenge_min > ChallengeLevel::kMax) {
    throw ConfigError("challenge_range.min", "must be within [1, 5]");
  }
  if (challenge_max < ChallengeLevel::kMin || challenge_max > ChallengeLevel::kMax) {
    throw ConfigError("challenge_range.max", "must be within [1, 5]");
  }
  if (challenge_min > challenge_max) throw ConfigError("challenge_range", "min exceeds max");
  if (inquiries_per_session == 0) throw ConfigError("inquiries_per_session", "must be >= 1");
  scripts.validate();
  hints.validate();
}

ActionRange ControllerConfig::challenge_actions() const {
  return {ChallengeLevel(challenge_min).action(), ChallengeLevel(challenge_max).action()};
}

Personalization Personalization::fresh(const ControllerConfig& config) {
  return Personalization{
      QTable(config.catalog.size(), ChallengeLevel::kCount, config.loc_params.q_init),
      QTable(config.catalog.size(), FeedbackLevel::kLearnedCount, config.lof_params.q_init),
  };
}

InstructionController::InstructionController(RlParams params, ActionRange range, int mistake_threshold)
    : params_(params), range_(range), threshold_(mistake_threshold) {}

ChallengeLevel InstructionController::choose(const QTable& table, const GameKind& game, Rng& rng) {
  const double epsilon = params_.epsilon_after(table.total_visits());
  const std::size_t action = select_action(table, game.id, epsilon, rng, range_);
  pending_ = Pending{game.id, action};
  return ChallengeLevel::from_action(action);
}

EpisodeUpdate InstructionController::close(QTable& table, const GameAttempt& attempt,
                                           std::optional<std::size_t> next_state) {
  if (!pending_) throw ContractViolation("instruction close without a pending episode");
  if (!attempt.resolved()) throw ContractViolation("instruction close on an unresolved attempt");
  if (attempt.game() != pending_->state || attempt.level().action() != pending_->action) {
    throw ContractViolation("instruction close: attempt does not match the pending episode");
  }
  const double reward = loc_reward(attempt.level(), attempt.mistakes(), threshold_);
  const auto result = q_update(table, pending_->state, pending_->action, reward, next_state, params_);
  EpisodeUpdate update{TableId::Challenge, pending_->state, pending_->action, reward,
                       next_state,         result.old_value, result.new_value};
  pending_.reset();
  return update;
}

FeedbackController::FeedbackController(RlParams params, int mistake_threshold, HintCatalog hints)
    : params_(params), threshold_(mistake_threshold), hints_(std::move(hints)) {}

FeedbackChoice FeedbackController::choose(const QTable& table, GameAttempt& attempt, Rng& rng) {
  if (attempt.resolved()) throw ContractViolation("feedback requested for a resolved attempt");
  if (pending_) throw ContractViolation("feedback chosen while a previous feedback episode is open");

  FeedbackLevel level = FeedbackLevel::bail_out();
  if (attempt.over_threshold()) {
    attempt.abandon();
  } else {
    const double epsilon = params_.epsilon_after(table.total_visits());
    const std::size_t action = select_action(table, attempt.game(), epsilon, rng);
    level = FeedbackLevel::from_action(action);
    pending_ = Pending{attempt.game(), action};
  }
  SarAct act{ActCategory::Feedback, hints_.text_for(level), FeedbackPayload{attempt.game(), level, hints_.text_for(level)}};
  return FeedbackChoice{level, std::move(act)};
}

EpisodeUpdate FeedbackController::close(QTable& table, const GameAttempt& attempt,
                                        std::optional<std::size_t> next_state) {
  if (!pending_) throw ContractViolation("feedback close without a pending episode");
  const FeedbackLevel level = FeedbackLevel::from_action(pending_->action);
  const double reward = lof_reward(level, attempt.mistakes(), attempt.help_requests(), threshold_);
  const auto result = q_update(table, pending_->state, pending_->action, reward, next_state, params_);
  EpisodeUpdate update{TableId::Feedback, pending_->state, pending_->action, reward,
                       next_state,        result.old_value, result.new_value};
  pending_.reset();
  return update;
}

std::vector<SarAct> StepOutput::acts() const {
  std::vector<SarAct> out;
  for (const auto& r : records) {
    if (const auto* act = std::get_if<SarAct>(&r)) out.push_back(*act);
  }
  return out;
}

std::vector<EpisodeUpdate> StepOutput::updates() const {
  std::vector<EpisodeUpdate> out;
  for (const auto& r : records) {
    if (const auto* u = std::get_if<EpisodeUpdate>(&r)) out.push_back(*u);
  }
  return out;
}

std::vector<GameKind> plan_games(const GameCatalog& catalog, std::size_t count, Rng& rng) {
  std::vector<GameKind> plan;
  plan.reserve(count);
  while (plan.size() < count) {
    for (auto& game : plan_session_games(catalog, rng)) {
      if (plan.size() == count) break;
      plan.push_back(std::move(game));
    }
  }
  return plan;
}

namespace {

ControllerConfig validated(ControllerConfig config) {
  config.validate();
  return config;
}

}  // namespace

MetaController::MetaController(ControllerConfig config, Personalization tables, std::size_t session_index,
                               ScriptController::Memory script_memory)
    : config_(validated(std::move(config))),
      tables_(std::move(tables)),
      session_index_(session_index),
      instruction_(config_.loc_params, config_.challenge_actions(), config_.mistake_threshold),
      feedback_(config_.lof_params, config_.mistake_threshold, config_.hints),
      scripts_(config_.scripts, script_memory) {
  if (tables_.challenge.states() != config_.catalog.size() || tables_.challenge.actions() != ChallengeLevel::kCount ||
      tables_.feedback.states() != config_.catalog.size() ||
      tables_.feedback.actions() != FeedbackLevel::kLearnedCount) {
    throw ContractViolation("personalization tables do not match the catalog dimensions");
  }
}

bool MetaController::accepts(LearnerEventKind kind) const {
  switch (phase_) {
    case SessionPhase::OpeningDisclosure: return kind == LearnerEventKind::SessionStart;
    case SessionPhase::GameLoop:
      return kind == LearnerEventKind::CorrectAnswer || kind == LearnerEventKind::Mistake ||
             kind == LearnerEventKind::HelpRequest;
    case SessionPhase::ClosingInquiry: return kind == LearnerEventKind::InquiryResponse;
    default: return false;
  }
}

void MetaController::emit(StepOutput& out, SarAct act) {
  if (!act_legal_in_phase(act.category, phase_)) {
    throw ContractViolation(std::string("act '") + std::string(to_string(act.category)) + "' emitted in phase " +
                            std::string(to_string(phase_)));
  }
  out.records.emplace_back(std::move(act));
}

StepOutput MetaController::step(const LearnerEvent& event, Rng& rng) {
  if (!accepts(event.kind)) {
    throw ProtocolError("event '" + std::string(to_string(event.kind)) + "' is not legal in phase " +
                        std::string(to_string(phase_)));
  }
  StepOutput out;
  switch (event.kind) {
    case LearnerEventKind::SessionStart:
      open_session(out, rng);
      break;
    case LearnerEventKind::CorrectAnswer:
      close_pending_feedback(out);
      attempt_->complete();
      finish_attempt(out, rng);
      break;
    case LearnerEventKind::Mistake:
      attempt_->record_mistake();
      close_pending_feedback(out);
      give_feedback(out, rng);
      break;
    case LearnerEventKind::HelpRequest:
      attempt_->record_help_request();
      close_pending_feedback(out);
      give_feedback(out, rng);
      break;
    case LearnerEventKind::InquiryResponse:
      if (inquiries_left_ > 0) {
        --inquiries_left_;
        active_ = ActiveController::Inquiry;
        emit(out, scripts_.act(ScriptKind::Inquiry, {session_index_, plan_.size()}, rng));
      } else {
        phase_ = SessionPhase::Ended;
        active_ = ActiveController::None;
      }
      break;
  }
  return out;
}

void MetaController::open_session(StepOutput& out, Rng& rng) {
  plan_ = plan_games(config_.catalog, config_.games_per_session, rng);
  const ScriptContext context{session_index_, plan_.size()};

  active_ = ActiveController::Disclosure;
  emit(out, scripts_.act(ScriptKind::Disclosure, context, rng));

  phase_ = SessionPhase::OpeningPromise;
  active_ = ActiveController::Promise;
  emit(out, scripts_.act(ScriptKind::Promise, context, rng));

  phase_ = SessionPhase::GameLoop;
  begin_next_game(out, rng);
}

void MetaController::begin_next_game(StepOutput& out, Rng& rng) {
  const GameKind& game = plan_[next_game_++];
  active_ = ActiveController::Instruction;
  const ChallengeLevel level = instruction_.choose(tables_.challenge, game, rng);
  attempt_.emplace(game.id, level, config_.mistake_threshold);
  const std::uint64_t problem_seed = rng();
  emit(out, SarAct{ActCategory::Instruction,
                   "Let's play " + game.name + "! " + game.description + " (level " + std::to_string(level.value()) + ")",
                   InstructionPayload{game.id, level, problem_seed}});
}

std::optional<std::size_t> MetaController::next_game_state() const {
  if (next_game_ < plan_.size()) return plan_[next_game_].id;
  return std::nullopt;
}

void MetaController::close_pending_feedback(StepOutput& out) {
  if (!feedback_.pending()) return;
  std::optional<std::size_t> next_state;
  if (!attempt_->resolved()) next_state = attempt_->game();
  out.records.emplace_back(feedback_.close(tables_.feedback, *attempt_, next_state));
}

void MetaController::give_feedback(StepOutput& out, Rng& rng) {
  active_ = ActiveController::Feedback;
  auto choice = feedback_.choose(tables_.feedback, *attempt_, rng);
  emit(out, std::move(choice.act));
  if (attempt_->resolved()) finish_attempt(out, rng);
}

void MetaController::finish_attempt(StepOutput& out, Rng& rng) {
  active_ = ActiveController::Instruction;
  out.records.emplace_back(instruction_.close(tables_.challenge, *attempt_, next_game_state()));
  out.records.emplace_back(*attempt_);
  attempt_.reset();

  if (next_game_ < plan_.size()) {
    begin_next_game(out, rng);
    return;
  }
  const ScriptContext context{session_index_, plan_.size()};
  phase_ = SessionPhase::ClosingPromiseFulfillment;
  active_ = ActiveController::Promise;
  emit(out, scripts_.act(ScriptKind::Fulfillment, context, rng));

  phase_ = SessionPhase::ClosingInquiry;
  active_ = ActiveController::Inquiry;
  emit(out, scripts_.act(ScriptKind::Inquiry, context, rng));
  inquiries_left_ = config_.inquiries_per_session - 1;
}

StepOutput MetaController::terminate() {
  StepOutput out;
  if (phase_ == SessionPhase::Ended) return out;
  feedback_.discard();
  if (attempt_ && instruction_.pending()) {
    if (attempt_->over_threshold()) {
      attempt_->abandon();
      out.records.emplace_back(instruction_.close(tables_.challenge, *attempt_, std::nullopt));
      out.records.emplace_back(*attempt_);
    } else {
      instruction_.discard();
    }
  }
  attempt_.reset();
  phase_ = SessionPhase::Ended;
  active_ = ActiveController::None;
  return out;
}

}  // namespace hhrl
