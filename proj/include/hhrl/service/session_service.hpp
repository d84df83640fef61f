#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhrl/config.hpp"
#include "hhrl/control/controllers.hpp"
#include "hhrl/run/event_log.hpp"
#include "hhrl/run/report.hpp"

namespace hhrl {

inline constexpr std::string_view kSessionSchema = "hhrl.session/1";

// Milliseconds since the Unix epoch.
using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_millis();

struct ServiceOptions {
  std::filesystem::path data_dir = "data";
  std::chrono::milliseconds session_timeout = std::chrono::minutes(30);
  Clock clock = system_clock_millis;
};

// One item pushed to a session's client. `seq` is the log sequence number of
// the record it was derived from.
struct SessionMessage {
  std::uint64_t seq = 0;
  std::string type;  // "act" or "session_end"
  nlohmann::json data;
};

struct SessionSnapshot {
  std::string session_id;
  std::string intervention_id;
  std::size_t session_index = 0;
  SessionPhase phase = SessionPhase::OpeningDisclosure;
  bool active = false;
  bool terminated = false;
  std::vector<std::size_t> plan;
  std::size_t games_started = 0;
  std::optional<AttemptRecord> attempt;
  std::vector<SessionMessage> messages;
};

struct StartResult {
  std::string session_id;
  std::vector<SarAct> acts;
};

struct InterventionInfo {
  std::string id;
  InterventionConfig config;
  std::size_t sessions_completed = 0;
  std::optional<std::string> active_session;
  Personalization tables;
};

nlohmann::json to_json(const SessionMessage& message);
nlohmann::json to_json(const SessionSnapshot& snapshot);

// Live sessions over persistent interventions. Each intervention lives in
// data_dir/<id>/ as meta.json plus an NDJSON event log; state is rebuilt from
// those files at construction. Every act is appended to the log before it is
// returned or pushed.
//
// Thread-safe. Calls on one intervention are serialized; different
// interventions proceed independently.
class SessionService {
 public:
  explicit SessionService(ServiceOptions options);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Throws ConfigError (with field path) on an invalid config. Any simulated
  // learner in the config is dropped: service sessions are live.
  std::string create_intervention(const nlohmann::json& config);
  InterventionInfo intervention(const std::string& intervention_id) const;
  std::vector<std::string> intervention_ids() const;

  // Throws NotFoundError, or ConflictError if a session is already active.
  StartResult start_session(const std::string& intervention_id);

  // Throws NotFoundError for an unknown session and ProtocolError (after
  // logging the rejected event) if the event is illegal now or the session
  // is no longer active.
  std::vector<SarAct> submit_event(const std::string& session_id, LearnerEventKind kind, std::string payload);

  SessionSnapshot get_state(const std::string& session_id) const;

  // Operator end. Idempotent for sessions that already ended.
  SessionSnapshot end_session(const std::string& session_id);

  ConvergenceReport get_report(const std::string& intervention_id) const;

  // Terminates sessions idle for longer than the timeout. Returns how many.
  std::size_t expire_idle();

  // Blocks until the session has more than `after` messages, it has ended,
  // or `timeout` passes. Returns messages from index `after` on.
  std::vector<SessionMessage> wait_messages(const std::string& session_id, std::size_t after,
                                            std::chrono::milliseconds timeout) const;

  // Wakes blocked wait_messages callers (used on shutdown).
  void shutdown();

 private:
  struct Intervention;
  struct SessionRef {
    std::shared_ptr<Intervention> intervention;
    std::size_t index;
  };

  std::shared_ptr<Intervention> load(const std::filesystem::path& dir);
  std::shared_ptr<Intervention> find_intervention(const std::string& id) const;
  SessionRef find_session(const std::string& session_id) const;
  void register_session(const std::shared_ptr<Intervention>& iv, std::size_t index);

  ServiceOptions options_;
  mutable std::mutex mutex_;  // guards the two maps below
  std::map<std::string, std::shared_ptr<Intervention>> interventions_;
  std::map<std::string, SessionRef> sessions_;
};

}  // namespace hhrl
