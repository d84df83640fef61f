#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "hhrl/config.hpp"
#include "hhrl/control/controllers.hpp"
#include "hhrl/run/event_log.hpp"
#include "hhrl/run/report.hpp"
#include "hhrl/sim/learner.hpp"

namespace hhrl {

struct RunOptions {
  // Log file; the log is kept in memory only when empty.
  std::optional<std::filesystem::path> log_path;
  // Monte Carlo trials per (game, level) for the oracle agreement figure;
  // 0 skips it. Only stationary learners get one.
  std::size_t oracle_trials = 10'000;
};

struct InterventionResult {
  std::vector<EventRecord> log;
  Personalization tables;
  ConvergenceReport report;
  LearnerProfile final_learner;  // after growth
};

// Simulated learner time between consecutive learner responses, and the gap
// between sessions (sessions run back to back; only the clock moves).
inline constexpr std::int64_t kSimResponseMillis = 4'000;
inline constexpr std::int64_t kSimSessionMillis = 86'400'000;

// Runs config.sessions sessions against the simulated learner. Requires
// config.learner. Deterministic given config (including seed).
InterventionResult run_intervention(const InterventionConfig& config, const RunOptions& options = {});

struct ReplayResult {
  InterventionConfig config;
  Personalization tables;
  ConvergenceReport report;
};

// Rebuilds the tables by re-applying every logged update with the logged
// config's parameters and checks each against the logged values. Throws
// CorruptLogError on a sequence gap (naming the first missing index) or a
// record that does not reproduce. An empty log yields fresh default tables
// and an empty report.
ReplayResult replay(std::span<const EventRecord> log, std::size_t oracle_trials = 10'000);

// Per-session engagement proxy (see kEngagementDefinition). Empty for live
// runs, which carry no proficiency.
std::optional<std::vector<double>> engagement_proxy(std::span<const EventRecord> log);

// Oracle-optimal challenge action per game for a stationary learner.
std::vector<std::size_t> oracle_actions(const LearnerProfile& learner, int mistake_threshold, std::size_t trials);

}  // namespace hhrl
