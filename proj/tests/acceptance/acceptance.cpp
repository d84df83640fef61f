// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "hhrl/config.hpp"
#include "hhrl/control/controllers.hpp"
#include "hhrl/rl/q_table.hpp"
#include "hhrl/rl/rewards.hpp"
#include "hhrl/run/event_log.hpp"
#include "hhrl/run/intervention.hpp"
#include "hhrl/run/report.hpp"
#include "hhrl/run/stats.hpp"
#include "hhrl/sim/learner.hpp"

using namespace hhrl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Line {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Line> lines;

void report_line(std::string name, bool pass, std::string detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  lines.push_back({std::move(name), pass, std::move(detail)});
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const std::vector<std::string> kStationary{"low", "mid", "high", "high-help", "uneven"};
const std::vector<std::string> kGrowing{"fast-growth", "steady-growth"};
constexpr std::size_t kConvergenceSeeds = 50;
constexpr std::size_t kPersonalizationSeeds = 30;
constexpr std::size_t kEngagementSeeds = 20;
constexpr std::size_t kOracleTrials = 10'000;

InterventionConfig base_config() {
  return load_intervention_config(fs::path(HHRL_SOURCE_DIR) / "presets" / "acceptance.yaml");
}

InterventionConfig config_for(const std::string& learner, std::uint64_t seed, InterventionConfig c = base_config()) {
  c.learner = builtin_preset(learner, c.controller.catalog.size());
  c.seed = seed;
  return c;
}

// Checks that hold for every simulated log; accumulated over the whole suite.
struct Audit {
  std::size_t logs = 0;
  std::size_t attempts = 0;
  std::size_t bailouts = 0;
  std::size_t bailout_violations = 0;
  std::size_t sessions = 0;
  std::size_t grammar_violations = 0;
  std::size_t replays = 0;
  std::size_t replay_failures = 0;
  std::string first_problem;

  void problem(const std::string& what) {
    if (first_problem.empty()) first_problem = what;
  }

  static char letter(const SarAct& act) {
    switch (act.category) {
      case ActCategory::Disclosure: return 'D';
      case ActCategory::Promise: return act.is_promise_fulfillment() ? 'Q' : 'P';
      case ActCategory::Instruction: return 'I';
      case ActCategory::Feedback: return 'F';
      case ActCategory::Inquiry: return 'N';
    }
    return '?';
  }

  void check(const InterventionConfig& config, const InterventionResult& result, const std::string& label) {
    ++logs;
    const int allowance = config.controller.mistake_threshold;
    const std::regex grammar("DP(IF*){" + std::to_string(config.controller.games_per_session) + "}QN+");

    std::map<std::size_t, std::string> traces;
    int running = 0;
    bool bailed = false;
    for (const auto& r : result.log) {
      if (const auto* e = std::get_if<LearnerEvent>(&r.body)) {
        if (e->kind == LearnerEventKind::Mistake) ++running;
      } else if (const auto* act = std::get_if<SarAct>(&r.body)) {
        traces[r.session].push_back(letter(*act));
        if (const auto* f = std::get_if<FeedbackPayload>(&act->payload)) {
          const bool is_bail = f->level.is_bail_out();
          bailed = bailed || is_bail;
          if (is_bail != (running == allowance + 1)) {
            ++bailout_violations;
            problem(label + ": feedback level " + std::to_string(f->level.value()) + " after " +
                    std::to_string(running) + " mistakes");
          }
        }
      } else if (const auto* a = std::get_if<AttemptRecord>(&r.body)) {
        ++attempts;
        const bool over = a->mistakes == allowance + 1;
        if ((a->outcome == AttemptOutcome::Abandoned) != over || bailed != over) {
          ++bailout_violations;
          problem(label + ": attempt with " + std::to_string(a->mistakes) + " mistakes, bail-out " +
                  (bailed ? "given" : "absent"));
        }
        bailouts += bailed;
        running = 0;
        bailed = false;
      }
    }
    for (const auto& [session, trace] : traces) {
      ++sessions;
      if (!std::regex_match(trace, grammar)) {
        ++grammar_violations;
        problem(label + ": session " + std::to_string(session) + " trace " + trace);
      }
    }

    ++replays;
    try {
      const auto back = replay(result.log, 0);
      auto expected = result.report;
      expected.challenge.oracle_agreement.reset();
      if (!(back.tables == result.tables) || !(back.report == expected)) {
        ++replay_failures;
        problem(label + ": replay differs from the run");
      }
    } catch (const std::exception& e) {
      ++replay_failures;
      problem(label + ": replay threw " + e.what());
    }
  }
};

Audit audit;

InterventionResult run_checked(const InterventionConfig& config, const std::string& label) {
  RunOptions options;
  options.oracle_trials = 0;
  auto result = run_intervention(config, options);
  audit.check(config, result, label);
  return result;
}

void rewards_criteria() {
  const auto start = Clock::now();
  const int big_m = 5;
  std::size_t loc_cells = 0, lof_cells = 0, loc_bad = 0, lof_bad = 0;
  double worst_lof = 0.0;
  int loc_lo = 0, loc_hi = 0;
  double lof_lo = 1e9, lof_hi = -1e9, norm_lo = 1e9, norm_hi = -1e9;
  for (int c = 1; c <= 5; ++c) {
    for (int m = 0; m <= 10; ++m) {
      // Hand evaluation: +c within the allowance, -c past it.
      const int expected = m <= big_m ? c : -c;
      const int r = loc_reward(ChallengeLevel(c), m, big_m);
      ++loc_cells;
      loc_bad += r != expected;
      loc_lo = std::min(loc_lo, r);
      loc_hi = std::max(loc_hi, r);
    }
  }
  for (int f = 1; f <= 4; ++f) {
    for (int m = 0; m <= 10; ++m) {
      for (int h = 0; h <= 10; ++h) {
        const double expected = -static_cast<double>(f) / (m + h + 1) + (m <= big_m ? 5.0 : 0.0);
        const double r = lof_reward(FeedbackLevel(f), m, h, big_m);
        const double err = std::abs(r - expected);
        ++lof_cells;
        lof_bad += !(err < 1e-12);
        worst_lof = std::max(worst_lof, err);
        lof_lo = std::min(lof_lo, r);
        lof_hi = std::max(lof_hi, r);
        const double n = normalize_lof_reward(r, big_m);
        norm_lo = std::min(norm_lo, n);
        norm_hi = std::max(norm_hi, n);
      }
    }
  }
  const double elapsed = seconds_since(start);
  report_line("reward exactness", loc_bad == 0 && lof_bad == 0 && elapsed < 1.0,
              fmt("%zu loc cells exact (%zu off), %zu lof cells max |err| %.1e (%zu off), %.3f s", loc_cells,
                  loc_bad, lof_cells, worst_lof, lof_bad, elapsed));

  const bool ranges = loc_lo >= -5 && loc_hi <= 5 && lof_lo >= -4.0 / 7.0 - 1e-15 && lof_hi < 5.0 &&
                      norm_lo >= 0.0 && norm_hi <= 1.0;
  report_line("reward ranges", ranges,
              fmt("loc in [%d, %d], lof in [%.6f, %.6f], normalized lof in [%.4f, %.4f]", loc_lo, loc_hi, lof_lo,
                  lof_hi, norm_lo, norm_hi));

  const auto tables = Personalization::fresh(base_config().controller);
  const bool sizes = tables.challenge.states() == 10 && tables.challenge.actions() == 5 &&
                     tables.challenge.cells() == 50 && tables.feedback.states() == 10 &&
                     tables.feedback.actions() == 4 && tables.feedback.cells() == 40;
  report_line("state-action space sizes", sizes,
              fmt("challenge %zux%zu = %zu, feedback %zux%zu = %zu", tables.challenge.states(),
                  tables.challenge.actions(), tables.challenge.cells(), tables.feedback.states(),
                  tables.feedback.actions(), tables.feedback.cells()));
}

void loc_convergence_criterion() {
  const auto start = Clock::now();
  const int big_m = base_config().controller.mistake_threshold;
  std::ostringstream detail;
  bool pass = true;
  std::size_t mid_unstable = 0, mid_runs = 0;
  std::size_t episodes = 0;

  for (const auto& name : kStationary) {
    const auto learner = builtin_preset(name, base_config().controller.catalog.size());
    const auto oracle = oracle_actions(learner, big_m, kOracleTrials);
    std::size_t agree = 0;
    for (std::uint64_t seed = 0; seed < kConvergenceSeeds; ++seed) {
      const auto result = run_checked(config_for(name, seed), name + "/seed " + std::to_string(seed));
      const auto& ch = result.report.challenge;
      episodes = ch.episodes();
      agree += policy_agreement(ch.final_policy, oracle) >= 0.8;
      if (name == "mid") {
        ++mid_runs;
        bool unstable = false;
        for (std::size_t w = 0; w < std::min<std::size_t>(4, ch.window_changes.size()); ++w)
          unstable = unstable || ch.window_changes[w] > 1;
        mid_unstable += unstable;
      }
    }
    pass = pass && agree * 10 >= kConvergenceSeeds * 9;
    detail << " " << name << " " << agree << "/" << kConvergenceSeeds;
  }
  const double elapsed = seconds_since(start);
  const bool mid_shows_instability = mid_unstable * 2 >= mid_runs;
  report_line("pLoC convergence to oracle", pass && mid_shows_instability && elapsed < 120.0,
              fmt("seeds with >= 8/10 oracle agreement after %zu episodes (need 45/50 each):", episodes) +
                  detail.str() +
                  fmt("; mid unstable before 100 episodes in %zu/%zu seeds; %.1f s", mid_unstable, mid_runs,
                      elapsed));
}

void lof_stabilization_criterion() {
  const auto start = Clock::now();
  std::ostringstream detail;
  bool pass = true;
  for (const auto& name : kStationary) {
    std::size_t stable = 0;
    for (std::uint64_t seed = 0; seed < kConvergenceSeeds; ++seed) {
      const auto result =
          run_checked(config_for(name, seed, InterventionConfig{}), name + "/default/seed " + std::to_string(seed));
      const auto& fb = result.report.feedback;
      stable += fb.episodes_to_stability.has_value() && *fb.episodes_to_stability <= 50;
    }
    pass = pass && stable * 10 >= kConvergenceSeeds * 8;
    detail << " " << name << " " << stable << "/" << kConvergenceSeeds;
  }
  const double elapsed = seconds_since(start);
  report_line("pLoF stabilization speed", pass && elapsed < 60.0,
              "seeds stable within 50 feedback episodes (need 40/50 each):" + detail.str() +
                  fmt("; %.1f s", elapsed));
}

double theta_gain(const InterventionResult& result) {
  std::optional<double> pre, post;
  for (const auto& r : result.log) {
    if (const auto* a = std::get_if<AssessmentRecord>(&r.body)) (a->post ? post : pre) = a->mean_theta;
  }
  if (!pre || !post) throw std::runtime_error("log lacks pre/post assessments");
  return *post - *pre;
}

// Per seed, gains are averaged over the nonstationary presets.
void personalization_criterion() {
  const auto start = Clock::now();
  std::vector<double> rl(kPersonalizationSeeds), f1(kPersonalizationSeeds), f5(kPersonalizationSeeds);
  std::ostringstream per_preset;
  const double presets = static_cast<double>(kGrowing.size());
  for (const auto& name : kGrowing) {
    double rl_sum = 0, f1_sum = 0, f5_sum = 0;
    for (std::uint64_t seed = 0; seed < kPersonalizationSeeds; ++seed) {
      const std::string label = name + "/seed " + std::to_string(seed);
      auto config = config_for(name, seed, InterventionConfig{});
      const double g_rl = theta_gain(run_checked(config, label + " rl"));
      config.controller.challenge_min = config.controller.challenge_max = 1;
      const double g_f1 = theta_gain(run_checked(config, label + " fixed-1"));
      config.controller.challenge_min = config.controller.challenge_max = 5;
      const double g_f5 = theta_gain(run_checked(config, label + " fixed-5"));
      rl[seed] += g_rl / presets;
      f1[seed] += g_f1 / presets;
      f5[seed] += g_f5 / presets;
      rl_sum += g_rl;
      f1_sum += g_f1;
      f5_sum += g_f5;
    }
    const double n = kPersonalizationSeeds;
    per_preset << fmt(" %s rl %.4f / fixed-1 %.4f / fixed-5 %.4f;", name.c_str(), rl_sum / n, f1_sum / n, f5_sum / n);
  }
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  std::size_t beats_f5 = 0;
  for (std::size_t i = 0; i < kPersonalizationSeeds; ++i) beats_f5 += rl[i] > f5[i];
  const double p = sign_test_p(beats_f5, kPersonalizationSeeds);
  const bool pass = mean(rl) > mean(f5) && p < 0.05 && mean(rl) >= mean(f1);
  const double elapsed = seconds_since(start);
  report_line("personalization benefit", pass && elapsed < 180.0,
              fmt("mean theta gain rl %.4f, fixed-1 %.4f, fixed-5 %.4f; rl > fixed-5 in %zu/%zu seeds (sign test p "
                  "%.2g); per preset:",
                  mean(rl), mean(f1), mean(f5), beats_f5, kPersonalizationSeeds, p) +
                  per_preset.str() + fmt(" %.1f s", elapsed));
}

void engagement_criterion() {
  const auto start = Clock::now();
  std::vector<double> mean_by_session;
  for (std::uint64_t seed = 0; seed < kEngagementSeeds; ++seed) {
    const auto result =
        run_checked(config_for("mid", seed, InterventionConfig{}), "engagement/seed " + std::to_string(seed));
    const auto proxy = engagement_proxy(result.log);
    if (!proxy) throw std::runtime_error("simulated run without an engagement proxy");
    mean_by_session.resize(proxy->size(), 0.0);
    for (std::size_t i = 0; i < proxy->size(); ++i) mean_by_session[i] += (*proxy)[i] / kEngagementSeeds;
  }
  std::vector<double> index(mean_by_session.size());
  std::iota(index.begin(), index.end(), 0.0);
  const auto corr = spearman(index, mean_by_session);
  report_line("engagement-proxy trend", corr.rho > 0 && corr.p_greater < 0.05,
              fmt("mid preset, mean proxy per session over %zu seeds: rho %.4f, one-sided p %.4f (n %zu); %.1f s",
                  kEngagementSeeds, corr.rho, corr.p_greater, corr.n, seconds_since(start)));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void determinism_criterion(const fs::path& out) {
  fs::create_directories(out);
  std::size_t identical = 0, disk_replays = 0, configs = 0;
  for (const auto& name : kStationary) {
    for (std::uint64_t seed : {0ull, 1ull}) {
      ++configs;
      const auto config = config_for(name, seed);
      const auto stem = out / (name + "-" + std::to_string(seed));
      RunOptions a, b;
      a.oracle_trials = b.oracle_trials = 0;
      a.log_path = stem.string() + ".a.ndjson";
      b.log_path = stem.string() + ".b.ndjson";
      const auto first = run_intervention(config, a);
      run_intervention(config, b);
      identical += slurp(*a.log_path) == slurp(*b.log_path);
      const auto back = replay(read_event_log(*a.log_path), 0);
      disk_replays += back.tables == first.tables;
    }
  }
  const bool pass = identical == configs && disk_replays == configs && audit.replay_failures == 0;
  report_line("determinism and replay", pass,
              fmt("%zu/%zu configs byte-identical across two runs, %zu/%zu logs replayed from disk to identical "
                  "tables, %zu/%zu in-memory replays exact",
                  identical, configs, disk_replays, configs, audit.replays - audit.replay_failures, audit.replays));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hhrl acceptance suite"};
  fs::path out = fs::temp_directory_path() / "hhrl-acceptance";
  app.add_option("--out", out, "directory for the determinism logs");
  CLI11_PARSE(app, argc, argv);

  try {
    rewards_criteria();
    loc_convergence_criterion();
    lof_stabilization_criterion();
    personalization_criterion();
    engagement_criterion();
    determinism_criterion(out);
  } catch (const std::exception& e) {
    std::cout << "FAIL suite aborted: " << e.what() << std::endl;
    return 1;
  }

  report_line("forced bail-out", audit.bailout_violations == 0 && audit.bailouts > 0,
              fmt("%zu attempts over %zu logs, %zu bail-outs, %zu violations", audit.attempts, audit.logs,
                  audit.bailouts, audit.bailout_violations) +
                  (audit.first_problem.empty() ? "" : "; first: " + audit.first_problem));
  report_line("session-protocol traces", audit.grammar_violations == 0,
              fmt("%zu/%zu sessions match the act grammar", audit.sessions - audit.grammar_violations,
                  audit.sessions));

  const auto failed = std::count_if(lines.begin(), lines.end(), [](const Line& l) { return !l.pass; });
  std::cout << lines.size() - failed << "/" << lines.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
