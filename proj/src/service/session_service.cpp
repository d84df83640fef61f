#include "hhrl/service/session_service.hpp"

#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <type_traits>

#include "hhrl/core/errors.hpp"
#include "hhrl/run/intervention.hpp"

namespace hhrl {

namespace {

using nlohmann::json;

// Live sessions draw from their own stream so any session can be rebuilt from
// its logged learner events alone.
constexpr std::uint64_t kLiveSessionStream = 1000;

using Body = std::pair<Actor, RecordBody>;

std::vector<Body> bodies_of(const StepOutput& out) {
  std::vector<Body> bodies;
  for (const auto& record : out.records) {
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, SarAct>) {
            bodies.emplace_back(Actor::Robot, r);
          } else if constexpr (std::is_same_v<T, EpisodeUpdate>) {
            bodies.emplace_back(Actor::System, r);
          } else {
            bodies.emplace_back(Actor::System, attempt_record(r, std::nullopt));
          }
        },
        record);
  }
  return bodies;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string session_token(const std::string& intervention_id, std::uint64_t secret, std::size_t index) {
  return intervention_id + "." + hex(derive_seed(secret, index));
}

std::uint64_t random_u64() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

std::int64_t system_clock_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

json to_json(const SessionMessage& m) {
  return {{"schema", kSessionSchema}, {"seq", m.seq}, {"type", m.type}, {"data", m.data}};
}

json to_json(const SessionSnapshot& s) {
  json messages = json::array();
  for (const auto& m : s.messages) messages.push_back(to_json(m));
  json attempt = nullptr;
  if (s.attempt) {
    attempt = {{"game", s.attempt->game},
               {"level", s.attempt->level},
               {"mistakes", s.attempt->mistakes},
               {"help_requests", s.attempt->help_requests}};
  }
  return {{"schema", kSessionSchema},
          {"session_id", s.session_id},
          {"intervention_id", s.intervention_id},
          {"session_index", s.session_index},
          {"phase", to_string(s.phase)},
          {"active", s.active},
          {"terminated", s.terminated},
          {"plan", s.plan},
          {"games_started", s.games_started},
          {"attempt", attempt},
          {"messages", std::move(messages)}};
}

struct SessionService::Intervention {
  struct History {
    SessionPhase phase = SessionPhase::OpeningDisclosure;
    bool active = true;
    bool terminated = false;
    std::vector<std::size_t> plan;
    std::size_t games_started = 0;
    std::optional<AttemptRecord> attempt;
    std::vector<SessionMessage> messages;
  };

  std::string id;
  std::uint64_t secret = 0;
  InterventionConfig config;
  EventLog log;
  Personalization tables;
  ScriptController::Memory memory{};
  std::size_t completed = 0;

  std::optional<MetaController> meta;
  Rng rng;
  std::int64_t last_activity = 0;

  std::vector<History> history;
  bool shutting_down = false;
  mutable std::mutex m;
  mutable std::condition_variable cv;

  Intervention(std::string id_, std::uint64_t secret_, InterventionConfig config_, EventLog log_)
      : id(std::move(id_)),
        secret(secret_),
        config(std::move(config_)),
        log(std::move(log_)),
        tables(Personalization::fresh(config.controller)) {}

  std::size_t live_index() const { return history.size() - 1; }

  void open(std::size_t index) {
    meta.emplace(config.controller, std::move(tables), index, memory);
    rng = Rng(derive_seed(config.seed, kLiveSessionStream + index));
    history.emplace_back();
  }

  void sync_history() {
    auto& h = history.back();
    h.phase = meta->phase();
    h.plan.clear();
    for (const auto& g : meta->plan()) h.plan.push_back(g.id);
    h.games_started = meta->games_started();
    h.attempt.reset();
    if (meta->attempt()) h.attempt = attempt_record(*meta->attempt(), std::nullopt);
  }

  void note(const EventRecord& r) {
    if (const auto* act = std::get_if<SarAct>(&r.body)) {
      history.back().messages.push_back({r.seq, "act", to_json(*act)});
    }
  }

  void write(std::int64_t time, const std::vector<Body>& bodies) {
    for (const auto& [actor, body] : bodies) note(log.append(live_index(), time, actor, body));
  }

  // Leaves the live session, keeping the learned tables for the next one.
  void close(std::int64_t time, SessionMarker marker, const std::string& reason) {
    retire(log.append(live_index(), time, Actor::System, SessionRecord{marker}), reason);
  }

  void retire(const EventRecord& marker_record, const std::string& reason) {
    sync_history();
    auto& h = history.back();
    h.active = false;
    h.terminated = std::get<SessionRecord>(marker_record.body).marker == SessionMarker::Terminated;
    h.phase = SessionPhase::Ended;
    h.attempt.reset();
    h.messages.push_back({marker_record.seq, "session_end", {{"reason", reason}}});
    memory = meta->script_memory();
    tables = std::move(*meta).take_tables();
    meta.reset();
    completed = live_index() + 1;
  }

  void after_step(std::int64_t time, const StepOutput& out) {
    write(time, bodies_of(out));
    sync_history();
    if (meta->phase() == SessionPhase::Ended) close(time, SessionMarker::End, "completed");
  }

  void terminate(std::int64_t time, const std::string& reason) {
    write(time, bodies_of(meta->terminate()));
    close(time, SessionMarker::Terminated, reason);
  }

  SessionSnapshot snapshot(std::size_t index) const {
    const auto& h = history.at(index);
    SessionSnapshot s;
    s.session_id = session_token(id, secret, index);
    s.intervention_id = id;
    s.session_index = index;
    s.phase = h.phase;
    s.active = h.active;
    s.terminated = h.terminated;
    s.plan = h.plan;
    s.games_started = h.games_started;
    s.attempt = h.attempt;
    s.messages = h.messages;
    return s;
  }

  // Re-executes every logged session and checks the log against what the
  // controllers produce. A trailing step whose outputs were only partly
  // written is completed.
  void restore(std::int64_t now) {
    const auto records = std::vector<EventRecord>(log.records().begin(), log.records().end());
    std::deque<Body> expected;
    std::vector<const EventRecord*> unmatched;  // outputs seen before a Terminated marker

    auto corrupt = [](const EventRecord& r, const std::string& what) {
      throw CorruptLogError(r.seq, "record " + std::to_string(r.seq) + ": " + what);
    };

    for (const auto& r : records) {
      if (std::holds_alternative<HeaderRecord>(r.body) || std::holds_alternative<AssessmentRecord>(r.body) ||
          std::holds_alternative<ProtocolErrorRecord>(r.body)) {
        continue;
      }
      if (const auto* marker = std::get_if<SessionRecord>(&r.body)) {
        if (!expected.empty()) corrupt(r, "session marker before the previous step was fully logged");
        if (marker->marker == SessionMarker::Begin) {
          if (meta || r.session != history.size()) corrupt(r, "unexpected session start");
          open(r.session);
          continue;
        }
        if (!meta) corrupt(r, "session end without an active session");
        std::vector<Body> logged_tail;
        for (const auto* u : unmatched) logged_tail.emplace_back(u->actor, u->body);
        if (marker->marker == SessionMarker::Terminated) {
          if (bodies_of(meta->terminate()) != logged_tail) corrupt(r, "termination does not reproduce");
        } else if (!unmatched.empty() || meta->phase() != SessionPhase::Ended) {
          corrupt(r, "session end before the session finished");
        }
        for (const auto* u : unmatched) note(*u);
        unmatched.clear();
        retire(r, marker->marker == SessionMarker::Terminated ? "terminated" : "completed");
        continue;
      }
      if (const auto* event = std::get_if<LearnerEvent>(&r.body)) {
        if (!meta || !expected.empty() || !unmatched.empty()) corrupt(r, "learner event out of place");
        try {
          const auto out = meta->step(*event, rng);
          for (auto& b : bodies_of(out)) expected.push_back(std::move(b));
        } catch (const ProtocolError& e) {
          corrupt(r, std::string("logged learner event is illegal: ") + e.what());
        }
        sync_history();
        last_activity = r.time;
        continue;
      }
      // Robot acts, table updates and attempt records.
      if (!meta) corrupt(r, "controller output outside a session");
      if (expected.empty()) {
        unmatched.push_back(&r);
        continue;
      }
      if (expected.front().first != r.actor || expected.front().second != r.body) {
        corrupt(r, "logged output does not match the replayed controllers");
      }
      expected.pop_front();
      note(r);
    }

    if (!unmatched.empty()) {
      throw CorruptLogError(unmatched.front()->seq, "trailing records without a session end marker");
    }
    if (meta) {
      write(now, std::vector<Body>(expected.begin(), expected.end()));
      sync_history();
      if (meta->phase() == SessionPhase::Ended) close(now, SessionMarker::End, "completed");
      last_activity = now;
    }
    const Personalization& current = meta ? meta->tables() : tables;
    if (!(replay(log.records(), 0).tables == current)) {
      throw CorruptLogError(log.next_seq(), "re-executed tables differ from the logged updates");
    }
  }
};

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
  std::error_code ec;
  std::filesystem::create_directories(options_.data_dir, ec);
  if (ec) throw IoError("cannot create data directory " + options_.data_dir.string() + ": " + ec.message());
  for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta.json")) {
      auto iv = load(entry.path());
      interventions_[iv->id] = iv;
      for (std::size_t i = 0; i < iv->history.size(); ++i) {
        sessions_[session_token(iv->id, iv->secret, i)] = SessionRef{iv, i};
      }
    }
  }
}

SessionService::~SessionService() { shutdown(); }

std::shared_ptr<SessionService::Intervention> SessionService::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("unreadable " + (dir / "meta.json").string() + ": " + e.what());
  }
  EventLog log = EventLog::resume(dir / "events.ndjson");
  const auto* header = log.records().empty() ? nullptr : std::get_if<HeaderRecord>(&log.records().front().body);
  if (!header) throw CorruptLogError(0, "event log in " + dir.string() + " has no intervention header");
  InterventionConfig config = intervention_config_from_json(header->config);
  auto iv = std::make_shared<Intervention>(meta.at("id").get<std::string>(), meta.at("secret").get<std::uint64_t>(),
                                           std::move(config), std::move(log));
  iv->restore(options_.clock());
  return iv;
}

std::string SessionService::create_intervention(const json& config_json) {
  InterventionConfig config = intervention_config_from_json(config_json);
  config.learner.reset();

  std::string id;
  std::filesystem::path dir;
  do {
    id = "iv-" + hex(random_u64()).substr(0, 12);
    dir = options_.data_dir / id;
  } while (std::filesystem::exists(dir));
  std::filesystem::create_directories(dir);
  const std::uint64_t secret = random_u64();
  {
    std::ofstream out(dir / "meta.json");
    out << json{{"id", id}, {"secret", secret}, {"created", options_.clock()}}.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  }
  EventLog log = EventLog::create(dir / "events.ndjson");
  log.append(0, options_.clock(), Actor::System, HeaderRecord{to_json(config)});

  auto iv = std::make_shared<Intervention>(id, secret, std::move(config), std::move(log));
  std::lock_guard lock(mutex_);
  interventions_[id] = std::move(iv);
  return id;
}

std::shared_ptr<SessionService::Intervention> SessionService::find_intervention(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = interventions_.find(id);
  if (it == interventions_.end()) throw NotFoundError("unknown intervention '" + id + "'");
  return it->second;
}

SessionService::SessionRef SessionService::find_session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

void SessionService::register_session(const std::shared_ptr<Intervention>& iv, std::size_t index) {
  std::lock_guard lock(mutex_);
  sessions_[session_token(iv->id, iv->secret, index)] = SessionRef{iv, index};
}

InterventionInfo SessionService::intervention(const std::string& intervention_id) const {
  const auto iv = find_intervention(intervention_id);
  std::lock_guard lock(iv->m);
  InterventionInfo info{iv->id, iv->config, iv->completed, std::nullopt, iv->meta ? iv->meta->tables() : iv->tables};
  if (iv->meta) info.active_session = session_token(iv->id, iv->secret, iv->live_index());
  return info;
}

std::vector<std::string> SessionService::intervention_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, iv] : interventions_) ids.push_back(id);
  return ids;
}

StartResult SessionService::start_session(const std::string& intervention_id) {
  const auto iv = find_intervention(intervention_id);
  std::size_t index = 0;
  StartResult result;
  {
    std::lock_guard lock(iv->m);
    if (iv->meta) {
      throw ConflictError("intervention '" + intervention_id + "' already has an active session");
    }
    index = iv->history.size();
    const std::int64_t now = options_.clock();
    iv->open(index);
    iv->log.append(index, now, Actor::System, SessionRecord{SessionMarker::Begin});
    const LearnerEvent start{LearnerEventKind::SessionStart, now, {}};
    iv->log.append(index, now, Actor::Learner, start);
    const StepOutput out = iv->meta->step(start, iv->rng);
    iv->last_activity = now;
    iv->after_step(now, out);
    result.acts = out.acts();
  }
  iv->cv.notify_all();
  register_session(iv, index);
  result.session_id = session_token(iv->id, iv->secret, index);
  return result;
}

std::vector<SarAct> SessionService::submit_event(const std::string& session_id, LearnerEventKind kind,
                                                 std::string payload) {
  const SessionRef ref = find_session(session_id);
  auto& iv = *ref.intervention;
  std::vector<SarAct> acts;
  {
    std::unique_lock lock(iv.m);
    const std::int64_t now = options_.clock();
    if (!iv.meta || iv.live_index() != ref.index) throw ProtocolError("session '" + session_id + "' has ended");
    if (now - iv.last_activity > options_.session_timeout.count()) {
      iv.terminate(now, "timeout");
      lock.unlock();
      iv.cv.notify_all();
      throw ProtocolError("session '" + session_id + "' expired after inactivity");
    }
    const LearnerEvent event{kind, now, std::move(payload)};
    if (!iv.meta->accepts(kind)) {
      const std::string message =
          std::string("event '") + std::string(to_string(kind)) + "' is not legal in phase " +
          std::string(to_string(iv.meta->phase()));
      iv.log.append(ref.index, now, Actor::Learner, ProtocolErrorRecord{event, message});
      throw ProtocolError(message);
    }
    iv.log.append(ref.index, now, Actor::Learner, event);
    const StepOutput out = iv.meta->step(event, iv.rng);
    iv.last_activity = now;
    iv.after_step(now, out);
    acts = out.acts();
  }
  iv.cv.notify_all();
  return acts;
}

SessionSnapshot SessionService::get_state(const std::string& session_id) const {
  const SessionRef ref = find_session(session_id);
  std::lock_guard lock(ref.intervention->m);
  return ref.intervention->snapshot(ref.index);
}

SessionSnapshot SessionService::end_session(const std::string& session_id) {
  const SessionRef ref = find_session(session_id);
  auto& iv = *ref.intervention;
  SessionSnapshot snap;
  {
    std::lock_guard lock(iv.m);
    if (iv.meta && iv.live_index() == ref.index) iv.terminate(options_.clock(), "operator");
    snap = iv.snapshot(ref.index);
  }
  iv.cv.notify_all();
  return snap;
}

ConvergenceReport SessionService::get_report(const std::string& intervention_id) const {
  const auto iv = find_intervention(intervention_id);
  std::lock_guard lock(iv->m);
  return replay(iv->log.records(), 0).report;
}

std::size_t SessionService::expire_idle() {
  std::vector<std::shared_ptr<Intervention>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, iv] : interventions_) all.push_back(iv);
  }
  std::size_t expired = 0;
  for (const auto& iv : all) {
    {
      std::lock_guard lock(iv->m);
      const std::int64_t now = options_.clock();
      if (!iv->meta || now - iv->last_activity <= options_.session_timeout.count()) continue;
      iv->terminate(now, "timeout");
      ++expired;
    }
    iv->cv.notify_all();
  }
  return expired;
}

std::vector<SessionMessage> SessionService::wait_messages(const std::string& session_id, std::size_t after,
                                                          std::chrono::milliseconds timeout) const {
  const SessionRef ref = find_session(session_id);
  auto& iv = *ref.intervention;
  std::unique_lock lock(iv.m);
  iv.cv.wait_for(lock, timeout, [&] {
    const auto& h = iv.history.at(ref.index);
    return iv.shutting_down || !h.active || h.messages.size() > after;
  });
  const auto& messages = iv.history.at(ref.index).messages;
  if (after >= messages.size()) return {};
  return {messages.begin() + static_cast<std::ptrdiff_t>(after), messages.end()};
}

void SessionService::shutdown() {
  std::vector<std::shared_ptr<Intervention>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, iv] : interventions_) all.push_back(iv);
  }
  for (const auto& iv : all) {
    {
      std::lock_guard lock(iv->m);
      iv->shutting_down = true;
    }
    iv->cv.notify_all();
  }
}

}  // namespace hhrl
