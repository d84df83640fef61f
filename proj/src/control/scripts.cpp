#include "hhrl/control/scripts.hpp"

#include <utility>

#include "hhrl/core/errors.hpp"

namespace hhrl {

namespace {

std::string fill(std::string text, std::string_view key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

void require_nonempty(const std::vector<std::string>& list, const std::string& path) {
  if (list.empty()) throw ConfigError(path, "script catalog is empty");
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].empty()) throw ConfigError(path + "[" + std::to_string(i) + "]", "empty utterance");
  }
}

}  // namespace

ScriptCatalog ScriptCatalog::defaults() {
  ScriptCatalog c;
  c.disclosures = {
      "My ship is running low on fuel. I need your help to reach planet {planet}!",
      "I'm a little lost in space today. Can you help me get to planet {planet}?",
      "I have been trying to get to planet {planet}, but I can't do it without your help.",
      "My star map says planet {planet} is next, but I need a co-pilot to help me get there.",
      "I feel a bit nervous about flying to planet {planet} alone. Will you help me?",
  };
  c.promises = {
      "If we complete all the games today, we will reach planet {planet}!",
      "We have {games} games to play. If we finish all the games, I promise we'll land on planet {planet}.",
      "Let's play all the games together, and we'll make it to planet {planet} today.",
      "Every game we finish brings us closer. After all the games, we'll be on planet {planet}!",
      "I promise that when we finish all the games, we'll see planet {planet} together.",
  };
  c.fulfillments = {
      "You did it! You completed all the games and we reached planet {planet}. Thank you!",
      "We made it to planet {planet}! Great job finishing all the games today.",
      "Look, it's planet {planet}! You helped me get here by completing all the games.",
      "Hooray, we landed on planet {planet}! I knew we could do it together.",
      "Thank you, co-pilot! All the games are done and planet {planet} is right below us.",
  };
  c.inquiries = {
      "What was the best part of your day today?",
      "What did you do before we played together?",
      "Which game did you like the most today, and why?",
      "What makes you happy when you are at home?",
      "If you could visit any planet, what would you want to see there?",
      "What is something new you learned this week?",
  };
  c.planets = {"Zorbit", "Glimmera", "Nova Prime", "Quasaria", "Lumos", "Pyxis", "Vela", "Orbix", "Cygna", "Talos"};
  return c;
}

void ScriptCatalog::validate(std::string_view path) const {
  const std::string p(path);
  require_nonempty(disclosures, p + ".disclosures");
  require_nonempty(promises, p + ".promises");
  require_nonempty(fulfillments, p + ".fulfillments");
  require_nonempty(inquiries, p + ".inquiries");
  require_nonempty(planets, p + ".planets");
}

HintCatalog HintCatalog::defaults() {
  return HintCatalog{
      {
          "Let's look at the question again. What does it ask us to do?",
          "Try counting out loud as you drag each one, one by one.",
          "Something isn't quite right yet. Check your answer and try changing it.",
          "Let's do it together, step by step. Start with the first one, then count on from there.",
      },
      "Let's try something else.",
  };
}

void HintCatalog::validate(std::string_view path) const {
  const std::string p(path);
  for (std::size_t i = 0; i < hints.size(); ++i) {
    if (hints[i].empty()) throw ConfigError(p + ".levels[" + std::to_string(i) + "]", "empty hint");
  }
  if (bail_out.empty()) throw ConfigError(p + ".bail_out", "empty bail-out utterance");
}

const std::string& HintCatalog::text_for(FeedbackLevel level) const {
  if (level.is_bail_out()) return bail_out;
  return hints[level.action()];
}

ScriptController::ScriptController(ScriptCatalog catalog, Memory memory)
    : catalog_(std::move(catalog)), last_(memory) {
  catalog_.validate();
}

std::string ScriptController::planet_for(std::size_t session_index) const {
  return catalog_.planets[session_index % catalog_.planets.size()];
}

std::size_t ScriptController::pick(ScriptKind kind, std::size_t n, Rng& rng) {
  auto& last = last_[static_cast<std::size_t>(kind)];
  std::size_t choice = 0;
  if (n > 1) {
    if (last && *last < n) {
      // Draw from the n-1 entries other than the previous one.
      choice = uniform_index(rng, n - 1);
      if (choice >= *last) ++choice;
    } else {
      choice = uniform_index(rng, n);
    }
  }
  last = choice;
  return choice;
}

SarAct ScriptController::act(ScriptKind kind, const ScriptContext& context, Rng& rng) {
  const std::vector<std::string>* list = nullptr;
  ActCategory category = ActCategory::Disclosure;
  switch (kind) {
    case ScriptKind::Disclosure: list = &catalog_.disclosures; category = ActCategory::Disclosure; break;
    case ScriptKind::Promise: list = &catalog_.promises; category = ActCategory::Promise; break;
    case ScriptKind::Fulfillment: list = &catalog_.fulfillments; category = ActCategory::Promise; break;
    case ScriptKind::Inquiry: list = &catalog_.inquiries; category = ActCategory::Inquiry; break;
  }
  const std::string planet = planet_for(context.session_index);
  std::string text = (*list)[pick(kind, list->size(), rng)];
  text = fill(std::move(text), "{planet}", planet);
  text = fill(std::move(text), "{games}", std::to_string(context.games_planned));

  SarAct act{category, std::move(text), std::monostate{}};
  if (category == ActCategory::Promise) act.payload = PromisePayload{kind == ScriptKind::Fulfillment, planet};
  return act;
}

}  // namespace hhrl
