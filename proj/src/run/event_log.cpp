#include "hhrl/run/event_log.hpp"

#include <string_view>

#include "hhrl/core/errors.hpp"

namespace hhrl {

namespace {

using nlohmann::json;

std::string_view to_string(Actor actor) {
  switch (actor) {
    case Actor::Robot: return "robot";
    case Actor::Learner: return "learner";
    case Actor::System: return "system";
  }
  return "system";
}

Actor actor_from_string(std::string_view text) {
  if (text == "robot") return Actor::Robot;
  if (text == "learner") return Actor::Learner;
  if (text == "system") return Actor::System;
  throw std::invalid_argument("unknown actor '" + std::string(text) + "'");
}

std::string_view to_string(SessionMarker marker) {
  switch (marker) {
    case SessionMarker::Begin: return "begin";
    case SessionMarker::End: return "end";
    case SessionMarker::Terminated: return "terminated";
  }
  return "begin";
}

SessionMarker marker_from_string(std::string_view text) {
  if (text == "begin") return SessionMarker::Begin;
  if (text == "end") return SessionMarker::End;
  if (text == "terminated") return SessionMarker::Terminated;
  throw std::invalid_argument("unknown session marker '" + std::string(text) + "'");
}

struct BodyWriter {
  json& data;
  std::string_view& type;

  void operator()(const HeaderRecord& h) {
    type = "intervention";
    data = {{"schema", kEventLogSchema}, {"config", h.config}};
  }
  void operator()(const SessionRecord& s) {
    type = "session";
    data = {{"marker", to_string(s.marker)}};
  }
  void operator()(const LearnerEvent& e) {
    type = "learner_event";
    data = to_json(e);
  }
  void operator()(const SarAct& a) {
    type = "act";
    data = to_json(a);
  }
  void operator()(const EpisodeUpdate& u) {
    type = "q_update";
    data = {{"table", to_string(u.table)},   {"state", u.state},         {"action", u.action},
            {"reward", u.reward},            {"old", u.old_value},       {"new", u.new_value},
            {"next_state", u.next_state ? json(*u.next_state) : json(nullptr)}};
  }
  void operator()(const AttemptRecord& a) {
    type = "attempt";
    data = {{"game", a.game},
            {"level", a.level},
            {"mistakes", a.mistakes},
            {"help_requests", a.help_requests},
            {"outcome", to_string(a.outcome)},
            {"theta", a.theta ? json(*a.theta) : json(nullptr)}};
  }
  void operator()(const AssessmentRecord& a) {
    type = "assessment";
    data = {{"post", a.post},
            {"numerical_operations", a.scores.numerical_operations},
            {"math_reasoning", a.scores.math_reasoning},
            {"mean_theta", a.mean_theta}};
  }
  void operator()(const ProtocolErrorRecord& p) {
    type = "protocol_error";
    data = {{"event", to_json(p.event)}, {"message", p.message}};
  }
};

RecordBody body_from_json(std::string_view type, const json& d) {
  if (type == "intervention") {
    if (d.at("schema").get<std::string>() != kEventLogSchema) {
      throw std::invalid_argument("unsupported log schema '" + d.at("schema").get<std::string>() + "'");
    }
    return HeaderRecord{d.at("config")};
  }
  if (type == "session") return SessionRecord{marker_from_string(d.at("marker").get<std::string>())};
  if (type == "learner_event") return learner_event_from_json(d);
  if (type == "act") return sar_act_from_json(d);
  if (type == "q_update") {
    EpisodeUpdate u;
    u.table = table_id_from_string(d.at("table").get<std::string>());
    u.state = d.at("state").get<std::size_t>();
    u.action = d.at("action").get<std::size_t>();
    u.reward = d.at("reward").get<double>();
    u.old_value = d.at("old").get<double>();
    u.new_value = d.at("new").get<double>();
    if (!d.at("next_state").is_null()) u.next_state = d.at("next_state").get<std::size_t>();
    return u;
  }
  if (type == "attempt") {
    AttemptRecord a;
    a.game = d.at("game").get<std::size_t>();
    a.level = d.at("level").get<int>();
    a.mistakes = d.at("mistakes").get<int>();
    a.help_requests = d.at("help_requests").get<int>();
    a.outcome = attempt_outcome_from_string(d.at("outcome").get<std::string>());
    if (!d.at("theta").is_null()) a.theta = d.at("theta").get<double>();
    return a;
  }
  if (type == "assessment") {
    return AssessmentRecord{d.at("post").get<bool>(),
                            SkillScores{d.at("numerical_operations").get<double>(), d.at("math_reasoning").get<double>()},
                            d.at("mean_theta").get<double>()};
  }
  if (type == "protocol_error") {
    return ProtocolErrorRecord{learner_event_from_json(d.at("event")), d.at("message").get<std::string>()};
  }
  throw std::invalid_argument("unknown record type '" + std::string(type) + "'");
}

}  // namespace

json to_json(const EventRecord& record) {
  json data;
  std::string_view type;
  std::visit(BodyWriter{data, type}, record.body);
  return {{"seq", record.seq},     {"session", record.session}, {"t", record.time},
          {"actor", to_string(record.actor)}, {"type", type}, {"data", std::move(data)}};
}

EventRecord event_record_from_json(const json& j, std::uint64_t line_index) {
  try {
    EventRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.session = j.at("session").get<std::size_t>();
    r.time = j.at("t").get<std::int64_t>();
    r.actor = actor_from_string(j.at("actor").get<std::string>());
    r.body = body_from_json(j.at("type").get<std::string>(), j.at("data"));
    return r;
  } catch (const std::exception& e) {
    throw CorruptLogError(line_index, "malformed log record at line " + std::to_string(line_index + 1) + ": " + e.what());
  }
}

AttemptRecord attempt_record(const GameAttempt& attempt, std::optional<double> theta) {
  return AttemptRecord{attempt.game(), attempt.level().value(), attempt.mistakes(), attempt.help_requests(),
                       attempt.outcome(), theta};
}

EventLog EventLog::create(const std::filesystem::path& path) {
  EventLog log;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  log.out_.open(path, std::ios::out | std::ios::trunc);
  if (!log.out_) throw IoError("cannot open event log for writing: " + path.string());
  log.path_ = path;
  return log;
}

EventLog EventLog::resume(const std::filesystem::path& path) {
  EventLog log;
  log.records_ = read_event_log(path);
  check_sequence(log.records_);
  log.out_.open(path, std::ios::out | std::ios::app);
  if (!log.out_) throw IoError("cannot open event log for appending: " + path.string());
  log.path_ = path;
  return log;
}

const EventRecord& EventLog::append(std::size_t session, std::int64_t time, Actor actor, RecordBody body) {
  EventRecord record{records_.size(), session, time, actor, std::move(body)};
  if (out_.is_open()) {
    out_ << to_json(record).dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("failed writing event log " + (path_ ? path_->string() : std::string{}));
  }
  records_.push_back(std::move(record));
  return records_.back();
}

std::vector<EventRecord> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event log: " + path.string());
  std::vector<EventRecord> records;
  std::string line;
  std::uint64_t line_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw CorruptLogError(line_index, "unparseable log line " + std::to_string(line_index + 1) + ": " + e.what());
      }
      records.push_back(event_record_from_json(j, line_index));
    }
    ++line_index;
  }
  return records;
}

void write_event_log(const std::filesystem::path& path, std::span<const EventRecord> records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot open event log for writing: " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("failed writing event log " + path.string());
}

void check_sequence(std::span<const EventRecord> records) {
  std::uint64_t expected = 0;
  for (const auto& r : records) {
    if (r.seq != expected) {
      if (r.seq < expected) {
        throw CorruptLogError(r.seq, "duplicate or out-of-order sequence number " + std::to_string(r.seq));
      }
      throw CorruptLogError(expected, "event log is missing record " + std::to_string(expected));
    }
    ++expected;
  }
}

}  // namespace hhrl
