#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhrl/control/controllers.hpp"
#include "hhrl/sim/learner.hpp"

namespace hhrl {

// Everything needed to run one intervention: a sequence of sessions sharing
// one pair of learned tables.
struct InterventionConfig {
  ControllerConfig controller;
  std::size_t sessions = 20;
  std::uint64_t seed = 7;
  // Simulated learner; empty for a live (human) learner.
  std::optional<LearnerProfile> learner;

  // Throws ConfigError with the offending field path.
  void validate() const;
};

// The JSON form is also the config file schema (see docs/config.md); every key
// is optional and defaults to the values above.
nlohmann::json to_json(const InterventionConfig& config);

// `population` resolves learner preset names not found among the built-ins.
InterventionConfig intervention_config_from_json(const nlohmann::json& j,
                                                 const std::vector<LearnerProfile>& population = {});

// Reads a YAML (or JSON) file into the equivalent JSON document.
nlohmann::json load_structured_file(const std::filesystem::path& path);

// Loads an intervention config file. A `population` key names a learner file
// relative to the config's directory.
InterventionConfig load_intervention_config(const std::filesystem::path& path);

// Learner population file: {learners: [profile, ...]}.
std::vector<LearnerProfile> load_population(const std::filesystem::path& path);
std::vector<LearnerProfile> population_from_json(const nlohmann::json& j);

}  // namespace hhrl
