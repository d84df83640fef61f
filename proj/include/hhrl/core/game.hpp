#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhrl/core/random.hpp"

namespace hhrl {

// Assessment subtest a game exercises: numerical operations or math reasoning.
enum class Subtest { NumericalOperations, MathReasoning };

std::string_view to_string(Subtest subtest);
Subtest subtest_from_string(std::string_view text);

struct GameKind {
  std::size_t id = 0;
  std::string name;
  std::string description;
  Subtest subtest = Subtest::NumericalOperations;

  friend bool operator==(const GameKind&, const GameKind&) = default;
};

using GameCatalog = std::vector<GameKind>;

// The ten space-math games shipped with the engine. "Select Galaxy" appears
// twice, once asking for more stars and once for fewer.
GameCatalog default_game_catalog();

// Throws ConfigError if the catalog is empty, ids are not 0..n-1 in order, or
// names repeat.
void validate_catalog(std::span<const GameKind> catalog);

// A uniformly random permutation of the whole catalog (sampling without
// replacement). Throws ConfigError on an empty catalog.
std::vector<GameKind> plan_session_games(std::span<const GameKind> catalog, Rng& rng);

}  // namespace hhrl
