#include "hhrl/core/game.hpp"

#include <set>
#include <utility>

#include "hhrl/core/errors.hpp"

namespace hhrl {

std::string_view to_string(Subtest subtest) {
  return subtest == Subtest::NumericalOperations ? "NO" : "MR";
}

Subtest subtest_from_string(std::string_view text) {
  if (text == "NO") return Subtest::NumericalOperations;
  if (text == "MR") return Subtest::MathReasoning;
  throw ConfigError("subtest", "expected NO or MR, got '" + std::string(text) + "'");
}

GameCatalog default_game_catalog() {
  using enum Subtest;
  struct Entry {
    const char* name;
    const char* description;
    Subtest subtest;
  };
  static constexpr Entry kEntries[] = {
      {"Pack Moon-Rocks", "Drag 1-10 moon-rocks into a box.", NumericalOperations},
      {"Select Galaxy More", "Select the galaxy with more stars.", MathReasoning},
      {"Select Galaxy Fewer", "Select the galaxy with fewer stars.", MathReasoning},
      {"Select Planet", "Select the planet with a particular number.", NumericalOperations},
      {"Feed Space Pets", "Evenly divide a set of stars between two alien pets.", NumericalOperations},
      {"Pets on a Spaceship", "Drag numbered alien pets into a spaceship in increasing or decreasing order.",
       NumericalOperations},
      {"Organize Moon-Rocks", "Separate and organize moon-rocks based on sprite and number.",
       NumericalOperations},
      {"Organize Space Objects", "Separate and organize space objects based on sprite and number.",
       NumericalOperations},
      {"Pattern Completion", "Complete a pattern with the provided space objects.", MathReasoning},
      {"Identify Alien Emotion", "Determine the emotion of alien friends from their facial expressions.",
       MathReasoning},
  };

  GameCatalog catalog;
  catalog.reserve(std::size(kEntries));
  for (const auto& e : kEntries) {
    catalog.push_back(GameKind{catalog.size(), e.name, e.description, e.subtest});
  }
  return catalog;
}

void validate_catalog(std::span<const GameKind> catalog) {
  if (catalog.empty()) throw ConfigError("catalog", "game catalog is empty");
  std::set<std::string> names;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto path = "catalog[" + std::to_string(i) + "]";
    if (catalog[i].id != i) throw ConfigError(path + ".id", "ids must be contiguous from 0");
    if (catalog[i].name.empty()) throw ConfigError(path + ".name", "name is empty");
    if (!names.insert(catalog[i].name).second) {
      throw ConfigError(path + ".name", "duplicate game name '" + catalog[i].name + "'");
    }
  }
}

std::vector<GameKind> plan_session_games(std::span<const GameKind> catalog, Rng& rng) {
  if (catalog.empty()) throw ConfigError("catalog", "cannot plan a session from an empty catalog");
  std::vector<GameKind> plan(catalog.begin(), catalog.end());
  for (std::size_t i = plan.size() - 1; i > 0; --i) {
    std::swap(plan[i], plan[uniform_index(rng, i + 1)]);
  }
  return plan;
}

}  // namespace hhrl
