#include "hhrl/run/intervention.hpp"

#include <numeric>
#include <type_traits>

#include "hhrl/core/errors.hpp"
#include "hhrl/rl/rewards.hpp"

namespace hhrl {

namespace {

double mean_theta(const LearnerProfile& learner) {
  if (learner.proficiency.empty()) return 0.0;
  return std::accumulate(learner.proficiency.begin(), learner.proficiency.end(), 0.0) /
         static_cast<double>(learner.proficiency.size());
}

AssessmentRecord assessment(const LearnerProfile& learner, const GameCatalog& catalog, bool post) {
  return AssessmentRecord{post, assess(learner, catalog), mean_theta(learner)};
}

const HeaderRecord* header_of(std::span<const EventRecord> log) {
  if (log.empty()) return nullptr;
  const auto* header = std::get_if<HeaderRecord>(&log.front().body);
  if (!header) throw CorruptLogError(0, "event log does not start with an intervention header");
  return header;
}

InterventionConfig config_of(const HeaderRecord& header) {
  try {
    return intervention_config_from_json(header.config);
  } catch (const ConfigError& e) {
    throw CorruptLogError(0, std::string("event log header holds an invalid config: ") + e.what());
  }
}

}  // namespace

std::vector<std::size_t> oracle_actions(const LearnerProfile& learner, int mistake_threshold, std::size_t trials) {
  OracleOptions options;
  options.mistake_threshold = mistake_threshold;
  options.trials = trials;
  std::vector<std::size_t> out;
  for (const auto& r : oracle_policy(learner, options)) out.push_back(r.best.action());
  return out;
}

InterventionResult run_intervention(const InterventionConfig& config, const RunOptions& options) {
  config.validate();
  if (!config.learner) throw ConfigError("learner", "a simulated learner is required to run an intervention");

  EventLog log = options.log_path ? EventLog::create(*options.log_path) : EventLog{};
  LearnerProfile learner = *config.learner;
  const auto& catalog = config.controller.catalog;
  Rng engine(derive_seed(config.seed, 1));
  Rng learner_rng(derive_seed(config.seed, 2));

  log.append(0, 0, Actor::System, HeaderRecord{to_json(config)});
  log.append(0, 0, Actor::System, assessment(learner, catalog, false));

  Personalization tables = Personalization::fresh(config.controller);
  ScriptController::Memory memory{};
  std::int64_t t = 0;
  for (std::size_t s = 0; s < config.sessions; ++s) {
    t = static_cast<std::int64_t>(s) * kSimSessionMillis;
    log.append(s, t, Actor::System, SessionRecord{SessionMarker::Begin});
    MetaController meta(config.controller, std::move(tables), s, memory);
    LearnerEvent event{LearnerEventKind::SessionStart, t, {}};
    std::optional<FeedbackLevel> last_feedback;

    while (true) {
      log.append(s, t, Actor::Learner, event);
      const StepOutput out = meta.step(event, engine);
      for (const auto& record : out.records) {
        std::visit(
            [&](const auto& r) {
              using T = std::decay_t<decltype(r)>;
              if constexpr (std::is_same_v<T, SarAct>) {
                if (r.category == ActCategory::Instruction) last_feedback.reset();
                if (const auto* fb = std::get_if<FeedbackPayload>(&r.payload)) last_feedback = fb->level;
                log.append(s, t, Actor::Robot, r);
              } else if constexpr (std::is_same_v<T, EpisodeUpdate>) {
                log.append(s, t, Actor::System, r);
              } else {
                log.append(s, t, Actor::System, attempt_record(r, learner.proficiency.at(r.game())));
                grow(learner, r);
              }
            },
            record);
      }
      if (meta.phase() == SessionPhase::Ended) break;

      t += kSimResponseMillis;
      if (meta.phase() == SessionPhase::ClosingInquiry) {
        event = LearnerEvent{LearnerEventKind::InquiryResponse, t, {}};
      } else {
        const auto& attempt = *meta.attempt();
        event = respond(learner, attempt.game(), attempt.level(), last_feedback, learner_rng);
        event.timestamp = t;
      }
    }
    memory = meta.script_memory();
    tables = std::move(meta).take_tables();
    log.append(s, t, Actor::System, SessionRecord{SessionMarker::End});
  }
  log.append(config.sessions - 1, t, Actor::System, assessment(learner, catalog, true));

  InterventionResult result{{log.records().begin(), log.records().end()}, std::move(tables), {}, std::move(learner)};
  result.report = replay(result.log, options.oracle_trials).report;
  return result;
}

ReplayResult replay(std::span<const EventRecord> log, std::size_t oracle_trials) {
  check_sequence(log);
  const HeaderRecord* header = header_of(log);
  InterventionConfig config;
  if (header) config = config_of(*header);

  ReplayResult result{config, Personalization::fresh(config.controller), {}};
  const int threshold = config.controller.mistake_threshold;
  TableReportBuilder challenge(TableId::Challenge, result.tables.challenge, std::nullopt);
  TableReportBuilder feedback(TableId::Feedback, result.tables.feedback, threshold);
  std::size_t sessions = 0;

  for (const auto& record : log) {
    if (const auto* marker = std::get_if<SessionRecord>(&record.body)) {
      if (marker->marker != SessionMarker::Begin) ++sessions;
      continue;
    }
    const auto* u = std::get_if<EpisodeUpdate>(&record.body);
    if (!u) continue;
    QTable& table = result.tables.table(u->table);
    const RlParams& params =
        u->table == TableId::Challenge ? config.controller.loc_params : config.controller.lof_params;
    if (u->state >= table.states() || u->action >= table.actions() ||
        (u->next_state && *u->next_state >= table.states())) {
      throw CorruptLogError(record.seq, "q_update record " + std::to_string(record.seq) + " is outside the table");
    }
    const UpdateResult applied = q_update(table, u->state, u->action, u->reward, u->next_state, params);
    if (applied.old_value != u->old_value || applied.new_value != u->new_value) {
      throw CorruptLogError(record.seq, "q_update record " + std::to_string(record.seq) + " does not reproduce");
    }
    (u->table == TableId::Challenge ? challenge : feedback).add(*u);
  }

  result.report.challenge = challenge.finish();
  result.report.feedback = feedback.finish();
  result.report.sessions = sessions;
  result.report.engagement = engagement_proxy(log);
  if (oracle_trials > 0 && config.learner && config.learner->stationary()) {
    result.report.challenge.oracle_agreement = policy_agreement(
        result.report.challenge.final_policy, oracle_actions(*config.learner, threshold, oracle_trials));
  }
  return result;
}

std::optional<std::vector<double>> engagement_proxy(std::span<const EventRecord> log) {
  const HeaderRecord* header = header_of(log);
  if (!header) return std::nullopt;
  const InterventionConfig config = config_of(*header);
  if (!config.learner) return std::nullopt;
  const LearnerProfile& learner = *config.learner;

  std::vector<double> series;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& record : log) {
    if (const auto* a = std::get_if<AttemptRecord>(&record.body)) {
      if (!a->theta) continue;
      const double target = 1.0 - *a->theta;
      sum += 1.0 - std::abs(learner.difficulty(ChallengeLevel{a->level}) - target);
      ++count;
    } else if (const auto* marker = std::get_if<SessionRecord>(&record.body)) {
      if (marker->marker == SessionMarker::Begin) continue;
      if (count > 0) series.push_back(sum / static_cast<double>(count));
      sum = 0.0;
      count = 0;
    }
  }
  return series;
}

}  // namespace hhrl
