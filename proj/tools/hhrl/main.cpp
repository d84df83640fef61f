#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <pthread.h>

#include "hhrl/config.hpp"
#include "hhrl/core/errors.hpp"
#include "hhrl/play/text_games.hpp"
#include "hhrl/run/intervention.hpp"
#include "hhrl/run/report.hpp"
#include "hhrl/service/http_server.hpp"
#include "hhrl/service/session_service.hpp"
#include "hhrl/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hhrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// "1..10", "4", "1,3,7" or mixtures such as "1..3,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dots));
        const auto hi = std::stoull(part.substr(dots + 2));
        if (hi < lo) throw ConfigError("seeds", "empty range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("seeds", "cannot parse '" + part + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("seeds", "no seeds given");
  return seeds;
}

std::optional<AssessmentRecord> assessment(const std::vector<EventRecord>& log, bool post) {
  for (const auto& r : log) {
    if (const auto* a = std::get_if<AssessmentRecord>(&r.body); a && a->post == post) return *a;
  }
  return std::nullopt;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

struct RunRow {
  std::string learner;
  std::uint64_t seed = 0;
  fs::path log;
  ConvergenceReport report;
  std::optional<AssessmentRecord> pre, post;
};

json row_json(const RunRow& r) {
  const auto& loc = r.report.challenge;
  const auto& lof = r.report.feedback;
  json eng = nullptr;
  if (r.report.engagement && !r.report.engagement->empty()) {
    eng = {{"first", r.report.engagement->front()}, {"last", r.report.engagement->back()}};
  }
  return {{"learner", r.learner},
          {"seed", r.seed},
          {"log", r.log.string()},
          {"loc_episodes", loc.episodes()},
          {"loc_final_cumulative_average", loc.cumulative_average.empty() ? json(nullptr) : json(loc.cumulative_average.back())},
          {"loc_oracle_agreement", optional_json(loc.oracle_agreement)},
          {"loc_episodes_to_stability", optional_json(loc.episodes_to_stability)},
          {"lof_episodes", lof.episodes()},
          {"lof_final_cumulative_average", lof.cumulative_average.empty() ? json(nullptr) : json(lof.cumulative_average.back())},
          {"lof_episodes_to_stability", optional_json(lof.episodes_to_stability)},
          {"engagement", eng},
          {"pre_mean_theta", r.pre ? json(r.pre->mean_theta) : json(nullptr)},
          {"post_mean_theta", r.post ? json(r.post->mean_theta) : json(nullptr)}};
}

void write_aggregate(const fs::path& out_dir, const std::string& stem, const std::vector<RunRow>& rows) {
  json all = json::array();
  for (const auto& r : rows) all.push_back(row_json(r));
  {
    std::ofstream out(out_dir / (stem + ".aggregate.json"));
    out << json{{"schema", kReportSchema}, {"stability_definition", kStabilityDefinition}, {"runs", all}}.dump(2)
        << '\n';
    if (!out) throw IoError("cannot write aggregate report in " + out_dir.string());
  }
  std::ofstream csv(out_dir / (stem + ".aggregate.csv"));
  const std::vector<std::string> cols{"learner", "seed", "loc_episodes", "loc_final_cumulative_average",
                                      "loc_oracle_agreement", "loc_episodes_to_stability", "lof_episodes",
                                      "lof_final_cumulative_average", "lof_episodes_to_stability",
                                      "pre_mean_theta", "post_mean_theta", "log"};
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n';
  for (const auto& row : all) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& v = row.at(cols[i]);
      csv << (i ? "," : "");
      if (v.is_string()) {
        csv << v.get<std::string>();
      } else if (!v.is_null()) {
        csv << v.dump();
      }
    }
    csv << '\n';
  }
  if (!csv) throw IoError("cannot write aggregate report in " + out_dir.string());
}

int cmd_simulate(const std::string& config_path, const std::string& seeds_text, const fs::path& out_dir,
                 unsigned jobs, const std::vector<std::string>& learners, const std::string& format_text,
                 std::optional<std::size_t> sessions, std::size_t oracle_trials) {
  InterventionConfig base;
  std::vector<std::uint64_t> seeds;
  ReportFormat format;
  std::vector<LearnerProfile> population;
  try {
    if (!fs::exists(config_path)) throw ConfigError("config", "file not found: " + config_path);
    base = load_intervention_config(config_path);
    seeds = parse_seeds(seeds_text);
    format = report_format_from_string(format_text);
    if (sessions) base.sessions = *sessions;
    const json raw = load_structured_file(config_path);
    if (raw.contains("population")) {
      fs::path pop = raw.at("population").get<std::string>();
      if (pop.is_relative()) pop = fs::path(config_path).parent_path() / pop;
      population = load_population(pop);
    }
    if (learners.empty()) {
      if (!base.learner) throw ConfigError("learner", "simulate needs a simulated learner, not 'live'");
      population = {*base.learner};
    } else {
      std::vector<LearnerProfile> chosen;
      for (const auto& name : learners) {
        const auto it = std::find_if(population.begin(), population.end(), [&](const auto& p) { return p.name == name; });
        chosen.push_back(it != population.end() ? *it : builtin_preset(name, base.controller.catalog.size()));
      }
      population = std::move(chosen);
    }
    for (const auto& p : population) {
      InterventionConfig probe = base;
      probe.learner = p;
      probe.validate();
    }
  } catch (const ConfigError& e) {
    std::cerr << "hhrl simulate: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "hhrl simulate: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kExitFailure;
  }

  struct Task {
    LearnerProfile learner;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& p : population) {
    for (const auto s : seeds) tasks.push_back({p, s});
  }
  std::vector<std::optional<RunRow>> rows(tasks.size());
  std::vector<std::string> failures;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  const std::string config_stem = fs::path(config_path).stem().string();

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& task = tasks[i];
      const std::string stem = config_stem + "-" + task.learner.name + "-seed" + std::to_string(task.seed);
      try {
        InterventionConfig config = base;
        config.learner = task.learner;
        config.seed = task.seed;
        RunOptions options;
        options.log_path = out_dir / (stem + ".events.ndjson");
        options.oracle_trials = oracle_trials;
        auto result = run_intervention(config, options);
        report_emit(result.report, format, out_dir / stem);
        RunRow row{task.learner.name, task.seed, *options.log_path, std::move(result.report),
                   assessment(result.log, false), assessment(result.log, true)};
        std::lock_guard lock(mutex);
        rows[i] = std::move(row);
        std::cout << "ok   " << stem << '\n';
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        failures.push_back(stem + ": " + e.what());
        std::cerr << "FAIL " << stem << ": " << e.what() << '\n';
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<RunRow> done;
  for (auto& r : rows) {
    if (r) done.push_back(std::move(*r));
  }
  try {
    write_aggregate(out_dir, config_stem, done);
  } catch (const std::exception& e) {
    std::cerr << "hhrl simulate: " << e.what() << '\n';
    return kExitFailure;
  }
  if (!failures.empty()) {
    std::cerr << failures.size() << " of " << tasks.size() << " runs failed:\n";
    for (const auto& f : failures) std::cerr << "  " << f << '\n';
    return kExitFailure;
  }
  std::cout << tasks.size() << " runs written to " << out_dir.string() << '\n';
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& logs, const std::string& format_text, const fs::path& out_dir,
               std::size_t oracle_trials) {
  ReportFormat format;
  try {
    format = report_format_from_string(format_text);
  } catch (const ConfigError& e) {
    std::cerr << "hhrl report: " << e.what() << '\n';
    return kExitUsage;
  }
  int status = kExitOk;
  for (const auto& path : logs) {
    try {
      const auto records = read_event_log(path);
      const auto result = replay(records, oracle_trials);
      std::string stem = fs::path(path).filename().string();
      for (const std::string suffix : {".ndjson", ".events"}) {
        if (stem.size() > suffix.size() && stem.ends_with(suffix)) stem.resize(stem.size() - suffix.size());
      }
      const fs::path target = out_dir.empty() ? fs::path(path).parent_path() / stem : out_dir / stem;
      for (const auto& written : report_emit(result.report, format, target)) std::cout << written.string() << '\n';
    } catch (const CorruptLogError& e) {
      std::cerr << "hhrl report: corrupt log " << path << ": " << e.what() << " (first bad index " << e.index()
                << ")\n";
      status = kExitFailure;
    } catch (const std::exception& e) {
      std::cerr << "hhrl report: " << path << ": " << e.what() << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

int cmd_serve(const std::string& bind, int port, const fs::path& data_dir, double timeout_seconds) {
  // Route SIGINT/SIGTERM to a watcher thread instead of async handlers.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGUSR1);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    ServiceOptions options;
    options.data_dir = data_dir;
    options.session_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_seconds * 1000.0));
    SessionService service(options);
    HttpServer server(service, HttpOptions{bind, port});
    const int bound = server.bind();
    std::cout << "hhrl serving on http://" << bind << ':' << bound << " (data " << data_dir.string() << ")"
              << std::endl;

    std::thread watcher([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      if (sig != SIGUSR1) std::cout << "hhrl: signal " << sig << ", shutting down" << std::endl;
      server.stop();
    });
    server.run();
    pthread_kill(watcher.native_handle(), SIGUSR1);  // releases the watcher if run() ended on its own
    watcher.join();
    std::cout << "hhrl: stopped" << std::endl;
    return kExitOk;
  } catch (const IoError& e) {
    std::cerr << "hhrl serve: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "hhrl serve: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_play(const std::string& config_path, const fs::path& data_dir, const std::string& intervention_id,
             std::optional<std::uint64_t> seed, bool echo) {
  try {
    InterventionConfig config;
    if (intervention_id.empty()) {
      if (!fs::exists(config_path)) throw ConfigError("config", "file not found: " + config_path);
      config = load_intervention_config(config_path);
      if (seed) config.seed = *seed;
    }
    ServiceOptions options;
    options.data_dir = data_dir;
    options.session_timeout = std::chrono::hours(24);
    SessionService service(options);
    const std::string id = intervention_id.empty() ? service.create_intervention(to_json(config)) : intervention_id;
    std::cout << "intervention " << id << " (data " << data_dir.string() << ")\n"
              << "Type your answer, 'help' for a hint, or 'quit' to stop.\n";
    const auto snapshot = run_play(service, id, std::cin, std::cout, echo);
    std::cout << "games started: " << snapshot.games_started << ", ended " << (snapshot.terminated ? "early" : "normally")
              << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "hhrl play: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "hhrl play: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hHRL personalization engine: simulation, reports, live sessions"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string sim_config, sim_seeds = "1", sim_format = "csv";
  fs::path sim_out = "runs";
  unsigned sim_jobs = 1;
  std::vector<std::string> sim_learners;
  std::optional<std::size_t> sim_sessions;
  std::size_t sim_oracle = 10'000;
  auto* simulate = app.add_subcommand("simulate", "Run simulated interventions across seeds and learners");
  simulate->add_option("--config", sim_config, "Intervention config file (YAML or JSON)");
  simulate->add_option("--seeds", sim_seeds, "Seeds, e.g. 1..10 or 1,4,9")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->capture_default_str();
  simulate->add_option("--jobs", sim_jobs, "Parallel runs")->capture_default_str()->check(CLI::Range(1u, 256u));
  simulate->add_option("--learner", sim_learners, "Learner profile name (repeatable); default: the config's");
  simulate->add_option("--sessions", sim_sessions, "Override the number of sessions");
  simulate->add_option("--format", sim_format, "Report format: csv or json")->capture_default_str();
  simulate->add_option("--oracle-trials", sim_oracle, "Monte Carlo trials for oracle agreement (0 = skip)")
      ->capture_default_str();

  std::vector<std::string> rep_logs;
  std::string rep_format = "csv";
  fs::path rep_out;
  std::size_t rep_oracle = 10'000;
  auto* report = app.add_subcommand("report", "Replay event logs and write convergence reports");
  report->add_option("--log", rep_logs, "Event log file (repeatable)")->required();
  report->add_option("--format", rep_format, "csv or json")->capture_default_str();
  report->add_option("--out", rep_out, "Output directory (default: next to each log)");
  report->add_option("--oracle-trials", rep_oracle, "Monte Carlo trials for oracle agreement (0 = skip)")
      ->capture_default_str();

  std::string srv_bind = env_or("HHRL_BIND", "127.0.0.1");
  int srv_port = std::stoi(env_or("HHRL_PORT", "8080"));
  fs::path srv_data = env_or("HHRL_DATA_DIR", "data");
  double srv_timeout = std::stod(env_or("HHRL_SESSION_TIMEOUT", "1800"));
  auto* serve = app.add_subcommand("serve", "Run the live session service");
  serve->add_option("--bind", srv_bind, "Bind address [env HHRL_BIND]")->capture_default_str();
  serve->add_option("--port", srv_port, "Port, 0 for any free port [env HHRL_PORT]")->capture_default_str();
  serve->add_option("--data-dir", srv_data, "Data directory [env HHRL_DATA_DIR]")->capture_default_str();
  serve->add_option("--session-timeout", srv_timeout, "Idle session timeout in seconds [env HHRL_SESSION_TIMEOUT]")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::string play_config, play_intervention;
  fs::path play_data = "play-data";
  std::optional<std::uint64_t> play_seed;
  bool play_echo = false;
  auto* play = app.add_subcommand("play", "Play one live session in the terminal");
  play->add_option("--config", play_config, "Intervention config file (YAML or JSON)");
  play->add_option("--data-dir", play_data, "Where the intervention is stored")->capture_default_str();
  play->add_option("--intervention", play_intervention, "Continue an existing intervention");
  play->add_option("--seed", play_seed, "Override the config seed");
  play->add_flag("--echo", play_echo, "Echo typed input (for scripted stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (*simulate) {
    if (sim_config.empty()) {
      std::cerr << "hhrl simulate: --config is required\n";
      return kExitUsage;
    }
    return cmd_simulate(sim_config, sim_seeds, sim_out, sim_jobs, sim_learners, sim_format, sim_sessions, sim_oracle);
  }
  if (*report) return cmd_report(rep_logs, rep_format, rep_out, rep_oracle);
  if (*serve) return cmd_serve(srv_bind, srv_port, srv_data, srv_timeout);
  if (*play) {
    if (play_config.empty() && play_intervention.empty()) {
      std::cerr << "hhrl play: --config or --intervention is required\n";
      return kExitUsage;
    }
    return cmd_play(play_config, play_data, play_intervention, play_seed, play_echo);
  }
  return kExitUsage;
}
