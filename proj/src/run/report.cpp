#include "hhrl/run/report.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "hhrl/core/errors.hpp"
#include "hhrl/rl/rewards.hpp"

namespace hhrl {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot write report file: " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing report file: " + path.string());
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, std::string_view suffix) {
  return std::filesystem::path(stem.string() + std::string(suffix));
}

void write_episode_csv(const TableReport& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  const bool normalized = !r.normalized_cumulative_average.empty();
  out << "episode,state,action,reward,cumulative_average";
  if (normalized) out << ",normalized_cumulative_average";
  out << '\n';
  for (std::size_t i = 0; i < r.episodes(); ++i) {
    out << i + 1 << ',' << r.states[i] << ',' << r.actions[i] << ',' << r.rewards[i] << ','
        << r.cumulative_average[i];
    if (normalized) out << ',' << r.normalized_cumulative_average[i];
    out << '\n';
  }
  close_out(out, path);
}

template <typename T>
std::string join(const std::vector<T>& v, char sep) {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s << sep;
    s << v[i];
  }
  return s.str();
}

}  // namespace

TableReportBuilder::TableReportBuilder(TableId id, QTable initial, std::optional<int> lof_threshold)
    : shadow_(std::move(initial)), greedy_(greedy_policy(shadow_)), lof_threshold_(lof_threshold) {
  report_.table = id;
}

void TableReportBuilder::add(const EpisodeUpdate& u) {
  if (u.state >= shadow_.states() || u.action >= shadow_.actions()) {
    throw ContractViolation("report: update outside table bounds");
  }
  auto& r = report_;
  const std::size_t episode = r.rewards.size();
  r.states.push_back(u.state);
  r.actions.push_back(u.action);
  r.rewards.push_back(u.reward);
  reward_sum_ += u.reward;
  const double avg = reward_sum_ / static_cast<double>(episode + 1);
  r.cumulative_average.push_back(avg);
  if (lof_threshold_) r.normalized_cumulative_average.push_back(normalize_lof_reward(avg, *lof_threshold_));

  shadow_.store(u.state, u.action, u.new_value);
  const auto row = shadow_.row(u.state);
  std::size_t best = 0;
  for (std::size_t a = 1; a < row.size(); ++a) {
    if (row[a] > row[best]) best = a;
  }
  if (episode % kStabilityWindow == 0) r.window_changes.push_back(0);
  if (best != greedy_[u.state]) {
    greedy_[u.state] = best;
    ++r.window_changes.back();
  }
}

TableReport TableReportBuilder::finish() const {
  TableReport r = report_;
  r.final_policy = greedy_;
  r.episodes_to_stability = episodes_to_stability(r.window_changes);
  return r;
}

std::optional<std::size_t> episodes_to_stability(const std::vector<std::size_t>& window_changes, std::size_t window) {
  if (window_changes.empty()) return std::nullopt;
  std::size_t k = window_changes.size();
  while (k > 0 && window_changes[k - 1] <= 1) --k;
  if (k == window_changes.size()) return std::nullopt;
  return k * window;
}

double policy_agreement(const std::vector<std::size_t>& policy, const std::vector<std::size_t>& oracle) {
  if (policy.size() != oracle.size() || policy.empty()) throw ContractViolation("policy_agreement: size mismatch");
  std::size_t same = 0;
  for (std::size_t i = 0; i < policy.size(); ++i) same += policy[i] == oracle[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(policy.size());
}

json to_json(const TableReport& r) {
  json j = {{"table", to_string(r.table)},
            {"episodes", r.episodes()},
            {"states", r.states},
            {"actions", r.actions},
            {"rewards", r.rewards},
            {"cumulative_average", r.cumulative_average},
            {"window_size", kStabilityWindow},
            {"window_changes", r.window_changes},
            {"episodes_to_stability", r.episodes_to_stability ? json(*r.episodes_to_stability) : json(nullptr)},
            {"final_policy", r.final_policy},
            {"oracle_agreement", r.oracle_agreement ? json(*r.oracle_agreement) : json(nullptr)}};
  if (!r.normalized_cumulative_average.empty()) {
    j["normalized_cumulative_average"] = r.normalized_cumulative_average;
  }
  return j;
}

json to_json(const ConvergenceReport& r) {
  return {{"schema", kReportSchema},
          {"sessions", r.sessions},
          {"stability_definition", kStabilityDefinition},
          {"engagement_definition", kEngagementDefinition},
          {"simulator_note", "learner dynamics and engagement are simulator constructs, not measured data"},
          {"loc", to_json(r.challenge)},
          {"lof", to_json(r.feedback)},
          {"engagement", r.engagement ? json(*r.engagement) : json(nullptr)}};
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  throw ConfigError("format", "expected csv or json, got '" + std::string(text) + "'");
}

std::vector<std::filesystem::path> report_emit(const ConvergenceReport& report, ReportFormat format,
                                               const std::filesystem::path& stem) {
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::Json) {
    const auto path = with_suffix(stem, ".json");
    auto out = open_out(path);
    out << to_json(report).dump(2) << '\n';
    close_out(out, path);
    written.push_back(path);
    return written;
  }

  const auto loc = with_suffix(stem, ".loc.csv");
  write_episode_csv(report.challenge, loc);
  written.push_back(loc);
  const auto lof = with_suffix(stem, ".lof.csv");
  write_episode_csv(report.feedback, lof);
  written.push_back(lof);

  const auto summary = with_suffix(stem, ".summary.csv");
  auto out = open_out(summary);
  out << "table,episodes,final_cumulative_average,episodes_to_stability,oracle_agreement,window_changes,final_policy\n";
  for (const TableReport* t : {&report.challenge, &report.feedback}) {
    out << to_string(t->table) << ',' << t->episodes() << ',';
    if (!t->cumulative_average.empty()) out << t->cumulative_average.back();
    out << ',';
    if (t->episodes_to_stability) out << *t->episodes_to_stability;
    out << ',';
    if (t->oracle_agreement) out << *t->oracle_agreement;
    out << ',' << join(t->window_changes, ' ') << ',' << join(t->final_policy, ' ') << '\n';
  }
  out << "# " << kStabilityDefinition << '\n';
  close_out(out, summary);
  written.push_back(summary);

  if (report.engagement) {
    const auto path = with_suffix(stem, ".engagement.csv");
    auto eng = open_out(path);
    eng << "session,engagement\n";
    for (std::size_t i = 0; i < report.engagement->size(); ++i) eng << i << ',' << (*report.engagement)[i] << '\n';
    close_out(eng, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace hhrl
