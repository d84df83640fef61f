#include "hhrl/rl/q_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hhrl/core/errors.hpp"

namespace hhrl {

void RlParams::validate(std::string_view path) const {
  const std::string p(path);
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(learning_rate) || learning_rate <= 0.0 || learning_rate > 1.0) {
    throw ConfigError(p + ".learning_rate", "must be in (0, 1]");
  }
  if (!finite(discount) || discount < 0.0 || discount >= 1.0) {
    throw ConfigError(p + ".discount", "must be in [0, 1)");
  }
  if (!finite(epsilon) || epsilon < 0.0 || epsilon > 1.0) throw ConfigError(p + ".epsilon", "must be in [0, 1]");
  if (!finite(epsilon_decay) || epsilon_decay <= 0.0 || epsilon_decay > 1.0) {
    throw ConfigError(p + ".epsilon_decay", "must be in (0, 1]");
  }
  if (!finite(epsilon_min) || epsilon_min < 0.0 || epsilon_min > epsilon) {
    throw ConfigError(p + ".epsilon_min", "must be in [0, epsilon]");
  }
  if (!finite(q_init)) throw ConfigError(p + ".q_init", "must be finite");
}

double RlParams::epsilon_after(std::uint64_t episodes) const {
  const double decayed = epsilon * std::pow(epsilon_decay, static_cast<double>(episodes));
  return std::clamp(decayed, epsilon_min, epsilon);
}

nlohmann::json to_json(const RlParams& params) {
  return {{"learning_rate", params.learning_rate}, {"discount", params.discount},
          {"epsilon", params.epsilon},             {"epsilon_decay", params.epsilon_decay},
          {"epsilon_min", params.epsilon_min},     {"q_init", params.q_init}};
}

RlParams rl_params_from_json(const nlohmann::json& j) {
  RlParams p;
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.discount = j.value("discount", p.discount);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.epsilon_decay = j.value("epsilon_decay", p.epsilon_decay);
  p.epsilon_min = j.value("epsilon_min", p.epsilon_min);
  p.q_init = j.value("q_init", p.q_init);
  return p;
}

QTable::QTable(std::size_t states, std::size_t actions, double initial_value)
    : states_(states),
      actions_(actions),
      values_(states * actions, initial_value),
      visits_(states * actions, 0) {
  if (states == 0 || actions == 0) throw ContractViolation("QTable dimensions must be non-zero");
  if (!std::isfinite(initial_value)) throw ContractViolation("QTable initial value must be finite");
}

std::size_t QTable::index(std::size_t state, std::size_t action) const {
  if (state >= states_ || action >= actions_) {
    throw ContractViolation("QTable index (" + std::to_string(state) + ", " + std::to_string(action) +
                            ") out of range");
  }
  return state * actions_ + action;
}

double QTable::value(std::size_t state, std::size_t action) const { return values_[index(state, action)]; }

std::uint64_t QTable::visits(std::size_t state, std::size_t action) const { return visits_[index(state, action)]; }

std::span<const double> QTable::row(std::size_t state) const {
  return std::span<const double>(values_).subspan(index(state, 0), actions_);
}

double QTable::row_max(std::size_t state) const {
  const auto r = row(state);
  return *std::max_element(r.begin(), r.end());
}

std::uint64_t QTable::total_visits() const {
  return std::accumulate(visits_.begin(), visits_.end(), std::uint64_t{0});
}

void QTable::store(std::size_t state, std::size_t action, double value) {
  const auto i = index(state, action);
  values_[i] = value;
  ++visits_[i];
}

void QTable::set_visits(std::size_t state, std::size_t action, std::uint64_t visits) {
  visits_[index(state, action)] = visits;
}

std::size_t select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng) {
  return select_action(q, state, epsilon, rng, ActionRange::all(q));
}

std::size_t select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng, ActionRange range) {
  if (range.first > range.last || range.last >= q.actions()) {
    throw ContractViolation("select_action: action range out of bounds");
  }
  const auto row = q.row(state);
  if (epsilon > 0.0 && uniform_unit(rng) < epsilon) {
    return range.first + uniform_index(rng, range.size());
  }
  double best = row[range.first];
  for (std::size_t a = range.first + 1; a <= range.last; ++a) best = std::max(best, row[a]);
  std::vector<std::size_t> tied;
  for (std::size_t a = range.first; a <= range.last; ++a) {
    if (row[a] == best) tied.push_back(a);
  }
  if (tied.size() == 1) return tied.front();
  return tied[uniform_index(rng, tied.size())];
}

UpdateResult q_update(QTable& q, std::size_t state, std::size_t action, double reward,
                      std::optional<std::size_t> next_state, const RlParams& params) {
  if (!std::isfinite(reward)) throw ContractViolation("q_update: reward must be finite");
  const double old_value = q.value(state, action);
  const double bootstrap = next_state ? params.discount * q.row_max(*next_state) : 0.0;
  const double new_value = old_value + params.learning_rate * (reward + bootstrap - old_value);
  q.store(state, action, new_value);
  return {old_value, new_value};
}

std::vector<std::size_t> greedy_policy(const QTable& q) {
  std::vector<std::size_t> policy(q.states());
  for (std::size_t s = 0; s < q.states(); ++s) {
    const auto r = q.row(s);
    policy[s] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return policy;
}

nlohmann::json to_json(const TableSnapshot& snapshot) {
  const QTable& q = snapshot.table;
  nlohmann::json values = nlohmann::json::array();
  nlohmann::json visits = nlohmann::json::array();
  for (std::size_t s = 0; s < q.states(); ++s) {
    nlohmann::json vrow = nlohmann::json::array();
    nlohmann::json crow = nlohmann::json::array();
    for (std::size_t a = 0; a < q.actions(); ++a) {
      vrow.push_back(q.value(s, a));
      crow.push_back(q.visits(s, a));
    }
    values.push_back(std::move(vrow));
    visits.push_back(std::move(crow));
  }
  nlohmann::json j{{"schema", kQTableSchema},
                   {"name", snapshot.name},
                   {"states", q.states()},
                   {"actions", q.actions()},
                   {"values", std::move(values)},
                   {"visits", std::move(visits)},
                   {"params", to_json(snapshot.params)}};
  if (snapshot.rng_state) j["rng_state"] = *snapshot.rng_state;
  return j;
}

TableSnapshot table_snapshot_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != kQTableSchema) {
      throw ConfigError("schema", "unsupported table schema '" + j.at("schema").get<std::string>() + "'");
    }
    const auto states = j.at("states").get<std::size_t>();
    const auto actions = j.at("actions").get<std::size_t>();
    const auto& values = j.at("values");
    const auto& visits = j.at("visits");
    if (values.size() != states || visits.size() != states) {
      throw ConfigError("values", "row count does not match declared states");
    }
    QTable q(states, actions);
    for (std::size_t s = 0; s < states; ++s) {
      if (values[s].size() != actions || visits[s].size() != actions) {
        throw ConfigError("values[" + std::to_string(s) + "]", "column count does not match declared actions");
      }
      for (std::size_t a = 0; a < actions; ++a) {
        q.store(s, a, values[s][a].get<double>());
        q.set_visits(s, a, visits[s][a].get<std::uint64_t>());
      }
    }
    TableSnapshot snap{j.value("name", std::string{}), std::move(q), rl_params_from_json(j.at("params")),
                       std::nullopt};
    if (j.contains("rng_state")) snap.rng_state = j.at("rng_state").get<std::string>();
    return snap;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("snapshot", e.what());
  }
}

}  // namespace hhrl
