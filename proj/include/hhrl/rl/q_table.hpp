#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhrl/core/random.hpp"

namespace hhrl {

// Q-learning hyperparameters for one table.
struct RlParams {
  double learning_rate = 0.1;  // alpha in (0, 1]
  double discount = 0.0;       // gamma in [0, 1)
  double epsilon = 0.3;        // initial exploration rate
  double epsilon_decay = 0.995;
  double epsilon_min = 0.05;
  double q_init = 0.0;

  // Throws ConfigError naming `path`.field on the first out-of-range value.
  void validate(std::string_view path = "rl") const;

  // Exploration rate after `episodes` completed updates:
  // max(epsilon_min, epsilon * decay^episodes), never above epsilon.
  double epsilon_after(std::uint64_t episodes) const;

  friend bool operator==(const RlParams&, const RlParams&) = default;
};

nlohmann::json to_json(const RlParams& params);
RlParams rl_params_from_json(const nlohmann::json& j);

// Dense state x action value grid with per-cell visit counts. Dimensions are
// fixed at construction.
class QTable {
 public:
  QTable(std::size_t states, std::size_t actions, double initial_value = 0.0);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  std::size_t cells() const { return states_ * actions_; }

  double value(std::size_t state, std::size_t action) const;
  std::uint64_t visits(std::size_t state, std::size_t action) const;
  std::span<const double> row(std::size_t state) const;
  double row_max(std::size_t state) const;
  std::uint64_t total_visits() const;

  // Writes one cell and counts a visit. Used by q_update and snapshot loading.
  void store(std::size_t state, std::size_t action, double value);
  void set_visits(std::size_t state, std::size_t action, std::uint64_t visits);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t index(std::size_t state, std::size_t action) const;

  std::size_t states_;
  std::size_t actions_;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

// Inclusive sub-range of actions eligible for selection.
struct ActionRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  static ActionRange all(const QTable& q) { return {0, q.actions() - 1}; }

  friend bool operator==(const ActionRange&, const ActionRange&) = default;
};

// Epsilon-greedy choice for `state`. Exploration draws uniformly from `range`;
// exploitation picks uniformly among the tied argmax actions within `range`.
std::size_t select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng);
std::size_t select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng, ActionRange range);

struct UpdateResult {
  double old_value = 0.0;
  double new_value = 0.0;
};

// One-step Q-learning backup on (state, action). `next_state` empty means the
// episode ended, so no bootstrap term is added.
UpdateResult q_update(QTable& q, std::size_t state, std::size_t action, double reward,
                      std::optional<std::size_t> next_state, const RlParams& params);

// Per-state argmax; ties go to the lowest action index.
std::vector<std::size_t> greedy_policy(const QTable& q);

// Snapshot document. Values are written with round-trip precision.
inline constexpr std::string_view kQTableSchema = "hhrl.qtable/1";

struct TableSnapshot {
  std::string name;
  QTable table;
  RlParams params;
  std::optional<std::string> rng_state;
};

nlohmann::json to_json(const TableSnapshot& snapshot);
// Throws ConfigError on schema mismatch or malformed content.
TableSnapshot table_snapshot_from_json(const nlohmann::json& j);

}  // namespace hhrl
