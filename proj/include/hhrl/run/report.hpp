#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhrl/control/controllers.hpp"

namespace hhrl {

inline constexpr std::size_t kStabilityWindow = 25;
inline constexpr std::string_view kStabilityDefinition =
    "episodes_to_stability is the first multiple of 25 episodes after which every 25-episode window "
    "(including a trailing partial one) has at most 1 greedy-policy cell change; absent if the last "
    "window still changes more than 1 cell";
inline constexpr std::string_view kEngagementDefinition =
    "per session, mean over attempts of 1 - |difficulty(level) - target|, target = 1 - theta of the game "
    "when played; simulator-defined proxy";
inline constexpr std::string_view kReportSchema = "hhrl.report/1";

// Learning curve and policy stability of one table.
struct TableReport {
  TableId table = TableId::Challenge;
  std::vector<std::size_t> states;         // per episode
  std::vector<std::size_t> actions;        // per episode
  std::vector<double> rewards;             // per episode, raw
  std::vector<double> cumulative_average;  // running mean of rewards
  // Feedback table only: cumulative_average mapped onto [0, 1].
  std::vector<double> normalized_cumulative_average;
  // Greedy action changes (one per episode at most) in each consecutive
  // 25-episode window; the last window may be partial.
  std::vector<std::size_t> window_changes;
  std::optional<std::size_t> episodes_to_stability;
  std::vector<std::size_t> final_policy;  // greedy action index per state
  std::optional<double> oracle_agreement;

  std::size_t episodes() const { return rewards.size(); }
  friend bool operator==(const TableReport&, const TableReport&) = default;
};

inline TableReport table_report(TableId id) {
  TableReport r;
  r.table = id;
  return r;
}

struct ConvergenceReport {
  TableReport challenge = table_report(TableId::Challenge);
  TableReport feedback = table_report(TableId::Feedback);
  // One value per completed session; empty for live learners.
  std::optional<std::vector<double>> engagement;
  std::size_t sessions = 0;

  friend bool operator==(const ConvergenceReport&, const ConvergenceReport&) = default;
};

// Incrementally builds a TableReport from a stream of updates.
class TableReportBuilder {
 public:
  // `initial` is the table before the first update; `lof_threshold` enables
  // the normalized column (feedback table).
  TableReportBuilder(TableId id, QTable initial, std::optional<int> lof_threshold);
  void add(const EpisodeUpdate& update);
  TableReport finish() const;

 private:
  TableReport report_;
  QTable shadow_;
  std::vector<std::size_t> greedy_;
  std::optional<int> lof_threshold_;
  double reward_sum_ = 0.0;
};

// Stability point for a window-change series, per kStabilityDefinition.
std::optional<std::size_t> episodes_to_stability(const std::vector<std::size_t>& window_changes,
                                                 std::size_t window = kStabilityWindow);

// Fraction of states whose greedy action equals the oracle's.
double policy_agreement(const std::vector<std::size_t>& policy, const std::vector<std::size_t>& oracle);

nlohmann::json to_json(const TableReport& report);
nlohmann::json to_json(const ConvergenceReport& report);

enum class ReportFormat { Csv, Json };
ReportFormat report_format_from_string(std::string_view text);

// Writes the report under `stem` (the extension is added per file):
//  csv:  <stem>.loc.csv, <stem>.lof.csv (one row per episode), <stem>.summary.csv,
//        <stem>.engagement.csv (simulated runs)
//  json: <stem>.json
// Returns the written paths. Throws IoError on write failure.
std::vector<std::filesystem::path> report_emit(const ConvergenceReport& report, ReportFormat format,
                                               const std::filesystem::path& stem);

}  // namespace hhrl
