#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhrl/control/controllers.hpp"
#include "hhrl/core/attempt.hpp"
#include "hhrl/core/session.hpp"
#include "hhrl/sim/learner.hpp"

namespace hhrl {

inline constexpr std::string_view kEventLogSchema = "hhrl.events/1";

enum class Actor { Robot, Learner, System };

// First record of every log: the full intervention configuration.
struct HeaderRecord {
  nlohmann::json config;
  friend bool operator==(const HeaderRecord&, const HeaderRecord&) = default;
};

enum class SessionMarker { Begin, End, Terminated };

struct SessionRecord {
  SessionMarker marker = SessionMarker::Begin;
  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

// A resolved game attempt; `theta` is the simulated learner's proficiency for
// that game when the attempt was played (absent for live sessions).
struct AttemptRecord {
  std::size_t game = 0;
  int level = 1;
  int mistakes = 0;
  int help_requests = 0;
  AttemptOutcome outcome = AttemptOutcome::Completed;
  std::optional<double> theta;
  friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

struct AssessmentRecord {
  bool post = false;
  SkillScores scores;
  double mean_theta = 0.0;
  friend bool operator==(const AssessmentRecord&, const AssessmentRecord&) = default;
};

struct ProtocolErrorRecord {
  LearnerEvent event;
  std::string message;
  friend bool operator==(const ProtocolErrorRecord&, const ProtocolErrorRecord&) = default;
};

using RecordBody = std::variant<HeaderRecord, SessionRecord, LearnerEvent, SarAct, EpisodeUpdate, AttemptRecord,
                                AssessmentRecord, ProtocolErrorRecord>;

struct EventRecord {
  std::uint64_t seq = 0;
  std::size_t session = 0;
  std::int64_t time = 0;
  Actor actor = Actor::System;
  RecordBody body;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

nlohmann::json to_json(const EventRecord& record);
// Throws CorruptLogError (index = `line_index`) on malformed content.
EventRecord event_record_from_json(const nlohmann::json& j, std::uint64_t line_index = 0);

AttemptRecord attempt_record(const GameAttempt& attempt, std::optional<double> theta);

// Append-only sequence of records with gap-free sequence numbers starting at 0.
// With a file attached, each record is written as one JSON line and flushed
// before append() returns.
class EventLog {
 public:
  EventLog() = default;
  // Creates or truncates `path`.
  static EventLog create(const std::filesystem::path& path);
  // Loads an existing log and continues appending to it.
  static EventLog resume(const std::filesystem::path& path);

  const EventRecord& append(std::size_t session, std::int64_t time, Actor actor, RecordBody body);

  std::span<const EventRecord> records() const { return records_; }
  std::uint64_t next_seq() const { return records_.size(); }
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  std::vector<EventRecord> records_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
};

// Parses an NDJSON log. Sequence continuity is checked by replay, not here.
std::vector<EventRecord> read_event_log(const std::filesystem::path& path);
void write_event_log(const std::filesystem::path& path, std::span<const EventRecord> records);

// Verifies seq == position for every record. Throws CorruptLogError naming the
// first missing sequence number.
void check_sequence(std::span<const EventRecord> records);

}  // namespace hhrl
