#include "hhrl/config.hpp"

#include <fstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "hhrl/core/errors.hpp"

namespace hhrl {

namespace {

using nlohmann::json;

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted scalar
  long long i = 0;
  if (YAML::convert<long long>::decode(node, i)) return i;
  double d = 0.0;
  if (YAML::convert<double>::decode(node, d)) return d;
  bool b = false;
  if (YAML::convert<bool>::decode(node, b)) return b;
  return text;
}

// Reads `key` from `obj` into `out` when present, reporting type errors
// against the dotted field path.
template <typename T>
void read(const json& obj, const std::string& key, T& out, const std::string& prefix = "") {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(prefix + key, std::string("wrong type: ") + e.what());
  }
}

RlParams read_rl(const json& j, const std::string& path) {
  RlParams p;
  if (!j.is_object()) throw ConfigError(path, "expected a mapping");
  const std::string prefix = path + ".";
  read(j, "learning_rate", p.learning_rate, prefix);
  read(j, "discount", p.discount, prefix);
  read(j, "epsilon", p.epsilon, prefix);
  read(j, "epsilon_decay", p.epsilon_decay, prefix);
  read(j, "epsilon_min", p.epsilon_min, prefix);
  read(j, "q_init", p.q_init, prefix);
  return p;
}

LearnerProfile read_learner(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected a learner mapping");
  try {
    LearnerProfile p = learner_profile_from_json(j);
    p.validate(path);
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  }
}

GameCatalog read_catalog(const json& j) {
  if (!j.is_array()) throw ConfigError("catalog", "expected a list of games");
  GameCatalog catalog;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto path = "catalog[" + std::to_string(i) + "]";
    const auto& g = j[i];
    if (!g.is_object()) throw ConfigError(path, "expected a mapping");
    GameKind kind;
    kind.id = i;
    read(g, "name", kind.name, path + ".");
    read(g, "description", kind.description, path + ".");
    std::string subtest = "NO";
    read(g, "subtest", subtest, path + ".");
    try {
      kind.subtest = subtest_from_string(subtest);
    } catch (const ConfigError&) {
      throw ConfigError(path + ".subtest", "expected NO or MR");
    }
    catalog.push_back(std::move(kind));
  }
  return catalog;
}

}  // namespace

void InterventionConfig::validate() const {
  if (sessions == 0) throw ConfigError("sessions", "must be >= 1");
  controller.validate();
  if (learner) {
    learner->validate("learner");
    learner->require_games(controller.catalog.size());
  }
}

json to_json(const InterventionConfig& config) {
  const auto& c = config.controller;
  json catalog = json::array();
  for (const auto& g : c.catalog) {
    catalog.push_back({{"name", g.name}, {"description", g.description}, {"subtest", to_string(g.subtest)}});
  }
  return {{"sessions", config.sessions},
          {"seed", config.seed},
          {"games_per_session", c.games_per_session},
          {"mistake_threshold", c.mistake_threshold},
          {"inquiries_per_session", c.inquiries_per_session},
          {"challenge_range", {c.challenge_min, c.challenge_max}},
          {"loc_rl", to_json(c.loc_params)},
          {"lof_rl", to_json(c.lof_params)},
          {"catalog", std::move(catalog)},
          {"scripts",
           {{"disclosures", c.scripts.disclosures},
            {"promises", c.scripts.promises},
            {"fulfillments", c.scripts.fulfillments},
            {"inquiries", c.scripts.inquiries},
            {"planets", c.scripts.planets}}},
          {"hints", {{"levels", c.hints.hints}, {"bail_out", c.hints.bail_out}}},
          {"learner", config.learner ? to_json(*config.learner) : json("live")}};
}

InterventionConfig intervention_config_from_json(const json& j, const std::vector<LearnerProfile>& population) {
  if (!j.is_object()) throw ConfigError("", "config must be a mapping");
  InterventionConfig config;
  auto& c = config.controller;
  read(j, "sessions", config.sessions);
  read(j, "seed", config.seed);
  read(j, "games_per_session", c.games_per_session);
  read(j, "mistake_threshold", c.mistake_threshold);
  read(j, "inquiries_per_session", c.inquiries_per_session);
  if (j.contains("challenge_range")) {
    const auto& r = j.at("challenge_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      throw ConfigError("challenge_range", "expected [min, max] integers");
    }
    c.challenge_min = r[0].get<int>();
    c.challenge_max = r[1].get<int>();
  }
  if (j.contains("loc_rl")) c.loc_params = read_rl(j.at("loc_rl"), "loc_rl");
  if (j.contains("lof_rl")) c.lof_params = read_rl(j.at("lof_rl"), "lof_rl");
  if (j.contains("catalog")) c.catalog = read_catalog(j.at("catalog"));
  if (j.contains("scripts")) {
    const auto& s = j.at("scripts");
    read(s, "disclosures", c.scripts.disclosures, "scripts.");
    read(s, "promises", c.scripts.promises, "scripts.");
    read(s, "fulfillments", c.scripts.fulfillments, "scripts.");
    read(s, "inquiries", c.scripts.inquiries, "scripts.");
    read(s, "planets", c.scripts.planets, "scripts.");
  }
  if (j.contains("hints")) {
    const auto& h = j.at("hints");
    if (h.contains("levels")) {
      std::vector<std::string> levels;
      read(h, "levels", levels, "hints.");
      if (levels.size() != c.hints.hints.size()) throw ConfigError("hints.levels", "expected exactly 4 hints");
      std::copy(levels.begin(), levels.end(), c.hints.hints.begin());
    }
    read(h, "bail_out", c.hints.bail_out, "hints.");
  }
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    if (l.is_string()) {
      const auto name = l.get<std::string>();
      if (name != "live") {
        std::optional<LearnerProfile> found;
        for (const auto& p : population) {
          if (p.name == name) found = p;
        }
        config.learner = found ? *found : builtin_preset(name, c.catalog.size());
      }
    } else {
      config.learner = read_learner(l, "learner");
    }
  }
  config.validate();
  return config;
}

json load_structured_file(const std::filesystem::path& path) {
  std::ifstream probe(path);
  if (!probe) throw ConfigError(path.string(), "cannot open file");
  try {
    return yaml_to_json(YAML::LoadFile(path.string()));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string(), std::string("parse error: ") + e.what());
  }
}

InterventionConfig load_intervention_config(const std::filesystem::path& path) {
  const json j = load_structured_file(path);
  std::vector<LearnerProfile> population;
  if (j.is_object() && j.contains("population")) {
    std::filesystem::path pop = j.at("population").get<std::string>();
    if (pop.is_relative()) pop = path.parent_path() / pop;
    population = load_population(pop);
  }
  return intervention_config_from_json(j, population);
}

std::vector<LearnerProfile> population_from_json(const json& j) {
  if (!j.is_object() || !j.contains("learners") || !j.at("learners").is_array()) {
    throw ConfigError("learners", "expected a 'learners' list");
  }
  std::vector<LearnerProfile> out;
  const auto& list = j.at("learners");
  for (std::size_t i = 0; i < list.size(); ++i) {
    json entry = list[i];
    // A scalar proficiency applies to every game.
    if (entry.is_object() && entry.contains("proficiency") && entry.at("proficiency").is_number()) {
      const double theta = entry.at("proficiency").get<double>();
      const std::size_t games = entry.value("games", std::size_t{10});
      entry["proficiency"] = std::vector<double>(games, theta);
    }
    out.push_back(read_learner(entry, "learners[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<LearnerProfile> load_population(const std::filesystem::path& path) {
  return population_from_json(load_structured_file(path));
}

}  // namespace hhrl
