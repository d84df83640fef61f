#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hhrl/core/game.hpp"
#include "hhrl/core/levels.hpp"
#include "hhrl/service/session_service.hpp"

namespace hhrl {

// A single-answer text rendering of one catalog game at one challenge level.
struct TextProblem {
  std::string prompt;
  std::string answer;  // canonical form
};

// Deterministic in (game id, level, seed). Games are matched to a generator by
// catalog position (id mod 10); see docs/text-games.md for the level table.
TextProblem make_problem(const GameKind& game, ChallengeLevel level, std::uint64_t seed);

// Case- and whitespace-insensitive; commas count as separators.
bool check_answer(const TextProblem& problem, std::string_view input);

// Interactive text session through a SessionService: prints robot acts, reads
// answers, `help` or `quit` from `in`. Returns the finished session snapshot.
SessionSnapshot run_play(SessionService& service, const std::string& intervention_id, std::istream& in,
                         std::ostream& out, bool echo_input = false);

}  // namespace hhrl
