#include "hhrl/play/text_games.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include "hhrl/core/errors.hpp"
#include "hhrl/core/random.hpp"

namespace hhrl {

namespace {

// Index 0 is level 1.
constexpr std::array<int, 5> kRange{5, 10, 20, 50, 100};
constexpr std::array<int, 5> kSortCount{3, 3, 4, 5, 6};
constexpr std::array<int, 5> kChoices{2, 3, 4, 5, 6};

int pick(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

std::vector<int> distinct(Rng& rng, int count, int lo, int hi) {
  std::vector<int> out;
  while (static_cast<int>(out.size()) < count) {
    const int v = pick(rng, lo, hi);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::string join(const std::vector<int>& v, std::string_view sep = " ") {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? sep : "") << v[i];
  return s.str();
}

std::string letter(std::size_t i) { return std::string(1, static_cast<char>('a' + i)); }

TextProblem pack_rocks(Rng& rng, int l) {
  const int target = pick(rng, 2, kRange[l]);
  if (l == 0) {
    return {"Pack " + std::to_string(target) + " moon-rocks into the empty box. How many rocks go in?",
            std::to_string(target)};
  }
  const int have = pick(rng, 1, target - 1);
  return {"The box needs " + std::to_string(target) + " moon-rocks and already holds " + std::to_string(have) +
              ". How many more rocks do you pack?",
          std::to_string(target - have)};
}

TextProblem select_galaxy(Rng& rng, int l, bool more) {
  const int count = l >= 3 ? 3 : 2;
  const auto stars = distinct(rng, count, 1, kRange[l]);
  std::ostringstream prompt;
  prompt << "Which galaxy has " << (more ? "more" : "fewer") << " stars?";
  for (int i = 0; i < count; ++i) prompt << ' ' << letter(static_cast<std::size_t>(i)) << ") " << stars[static_cast<std::size_t>(i)] << " stars";
  const auto it = more ? std::max_element(stars.begin(), stars.end()) : std::min_element(stars.begin(), stars.end());
  return {prompt.str() + " (type the letter)", letter(static_cast<std::size_t>(it - stars.begin()))};
}

TextProblem select_planet(Rng& rng, int l) {
  const int count = kChoices[l];
  const auto labels = distinct(rng, count, 1, kRange[l] * 2);
  const std::size_t answer = uniform_index(rng, static_cast<std::size_t>(count));
  std::ostringstream prompt;
  prompt << "Fly to planet number " << labels[answer] << "!";
  for (std::size_t i = 0; i < labels.size(); ++i) prompt << ' ' << letter(i) << ") planet " << labels[i];
  return {prompt.str() + " (type the letter)", letter(answer)};
}

TextProblem feed_pets(Rng& rng, int l) {
  if (l <= 2) {
    const int total = kRange[l];
    const int a = pick(rng, 1, total - 1);
    const int b = pick(rng, 1, total - a);
    return {"One space pet eats " + std::to_string(a) + " treats and another eats " + std::to_string(b) +
                ". How many treats do you need?",
            std::to_string(a + b)};
  }
  const int pets = pick(rng, 2, l == 3 ? 5 : 9);
  const int each = pick(rng, l == 3 ? 1 : 2, l == 3 ? 5 : 9);
  return {"There are " + std::to_string(pets) + " space pets and each eats " + std::to_string(each) +
              " treats. How many treats do you need?",
          std::to_string(pets * each)};
}

TextProblem spaceship(Rng& rng, int l) {
  const int seats = pick(rng, 2, kRange[l]);
  const int pets = pick(rng, 1, seats);
  return {"The spaceship has " + std::to_string(seats) + " seats and " + std::to_string(pets) +
              (pets == 1 ? " pet climbs" : " pets climb") + " aboard. How many seats are still empty?",
          std::to_string(seats - pets)};
}

TextProblem organize(Rng& rng, int l, bool ascending) {
  auto sizes = distinct(rng, kSortCount[l], 1, kRange[l] + 5);
  const std::string prompt = std::string("Line these up from ") + (ascending ? "smallest to largest" : "largest to smallest") +
                             ": " + join(sizes);
  if (ascending) {
    std::sort(sizes.begin(), sizes.end());
  } else {
    std::sort(sizes.rbegin(), sizes.rend());
  }
  return {prompt, join(sizes)};
}

TextProblem pattern(Rng& rng, int l) {
  std::vector<int> seq;
  int next = 0;
  switch (l) {
    case 0:
    case 1:
    case 2: {
      const int step = l == 0 ? 1 : (l == 1 ? pick(rng, 2, 3) : pick(rng, 4, 10));
      int v = pick(rng, 0, 10);
      for (int i = 0; i < 4; ++i, v += step) seq.push_back(v);
      next = v;
      break;
    }
    case 3: {
      const int step = pick(rng, 2, 5);
      int v = pick(rng, 20, 40);
      for (int i = 0; i < 4; ++i, v -= step) seq.push_back(v);
      next = v;
      break;
    }
    default: {
      const int a = pick(rng, 1, 4);
      const int b = pick(rng, 5, 9);
      int v = pick(rng, 0, 5);
      for (int i = 0; i < 5; ++i) {
        seq.push_back(v);
        v += i % 2 == 0 ? a : b;
      }
      next = v;
      break;
    }
  }
  return {"What comes next? " + join(seq) + " ?", std::to_string(next)};
}

TextProblem alien_emotion(Rng& rng, int l) {
  struct Emotion {
    const char* name;
    const char* plain;
    const char* subtle;
  };
  static constexpr std::array<Emotion, 5> kEmotions{{
      {"happy", "is smiling wide and jumping up and down", "has curled-up antennae and a small grin"},
      {"sad", "is crying big blue tears", "is looking at the ground with droopy eyes"},
      {"angry", "is stomping and shouting with a red face", "has narrowed eyes and crossed arms"},
      {"scared", "is shaking and hiding behind a rock", "has wide eyes and is backing away slowly"},
      {"surprised", "has a wide-open mouth and eyes popping out", "has raised eyebrows and a round mouth"},
  }};
  const std::size_t options = static_cast<std::size_t>(std::min(kChoices[l], 5));
  std::vector<std::size_t> order{0, 1, 2, 3, 4};
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
  order.resize(options);
  const auto& e = kEmotions[order[uniform_index(rng, options)]];
  std::string prompt = std::string("The alien ") + (l < 2 ? e.plain : e.subtle) + ". How does it feel?";
  std::string names;
  for (std::size_t i = 0; i < order.size(); ++i) names += (i ? " / " : "") + std::string(kEmotions[order[i]].name);
  return {prompt + " (" + names + ")", e.name};
}

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

TextProblem make_problem(const GameKind& game, ChallengeLevel level, std::uint64_t seed) {
  Rng rng(derive_seed(seed, game.id));
  const int l = level.value() - ChallengeLevel::kMin;
  switch (game.id % 10) {
    case 0: return pack_rocks(rng, l);
    case 1: return select_galaxy(rng, l, true);
    case 2: return select_galaxy(rng, l, false);
    case 3: return select_planet(rng, l);
    case 4: return feed_pets(rng, l);
    case 5: return spaceship(rng, l);
    case 6: return organize(rng, l, true);
    case 7: return organize(rng, l, false);
    case 8: return pattern(rng, l);
    default: return alien_emotion(rng, l);
  }
}

bool check_answer(const TextProblem& problem, std::string_view input) {
  const auto got = tokens(input);
  return !got.empty() && got == tokens(problem.answer);
}

SessionSnapshot run_play(SessionService& service, const std::string& intervention_id, std::istream& in,
                         std::ostream& out, bool echo_input) {
  const auto catalog = service.intervention(intervention_id).config.controller.catalog;
  const auto started = service.start_session(intervention_id);
  const std::string& sid = started.session_id;
  std::optional<TextProblem> problem;

  auto show = [&](const std::vector<SarAct>& acts) {
    for (const auto& act : acts) {
      out << "[" << to_string(act.category) << "] " << act.utterance << '\n';
      if (const auto* ins = std::get_if<InstructionPayload>(&act.payload)) {
        problem = make_problem(catalog.at(ins->game), ins->level, ins->problem_seed);
        out << "  " << problem->prompt << '\n';
      }
    }
  };
  auto status = [&] {
    const auto state = service.get_state(sid);
    if (state.attempt) {
      out << "  (mistakes " << state.attempt->mistakes << ", help requests " << state.attempt->help_requests
          << ")\n";
    }
    return state;
  };

  show(started.acts);
  std::string line;
  while (true) {
    const auto state = service.get_state(sid);
    if (!state.active) break;
    const bool inquiry = state.phase == SessionPhase::ClosingInquiry;
    out << (inquiry ? "you say> " : "answer> ") << std::flush;
    if (!std::getline(in, line)) {
      out << '\n';
      return service.end_session(sid);
    }
    line = trim(line);
    if (echo_input) out << line << '\n';
    if (line == "quit") return service.end_session(sid);

    LearnerEventKind kind = LearnerEventKind::InquiryResponse;
    if (!inquiry) {
      if (line == "help") {
        kind = LearnerEventKind::HelpRequest;
      } else if (problem && check_answer(*problem, line)) {
        kind = LearnerEventKind::CorrectAnswer;
      } else {
        kind = LearnerEventKind::Mistake;
      }
    }
    try {
      const auto acts = service.submit_event(sid, kind, line);
      if (kind == LearnerEventKind::CorrectAnswer) out << "  Correct!\n";
      show(acts);
      if (kind == LearnerEventKind::Mistake || kind == LearnerEventKind::HelpRequest) {
        if (!acts.empty() && acts.back().category == ActCategory::Feedback && problem) {
          status();
          out << "  " << problem->prompt << '\n';
        }
      }
    } catch (const ProtocolError& e) {
      out << "  (" << e.what() << ")\n";
    }
  }
  out << "Session over.\n";
  return service.get_state(sid);
}

}  // namespace hhrl
