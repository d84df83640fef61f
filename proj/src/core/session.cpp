#include "hhrl/core/session.hpp"

#include <array>
#include <utility>

#include "hhrl/core/errors.hpp"

namespace hhrl {

namespace {

constexpr std::array<std::pair<ActCategory, std::string_view>, 5> kCategoryNames{{
    {ActCategory::Disclosure, "disclosure"},
    {ActCategory::Promise, "promise"},
    {ActCategory::Instruction, "instruction"},
    {ActCategory::Feedback, "feedback"},
    {ActCategory::Inquiry, "inquiry"},
}};

constexpr std::array<std::pair<LearnerEventKind, std::string_view>, 5> kEventNames{{
    {LearnerEventKind::SessionStart, "session_start"},
    {LearnerEventKind::CorrectAnswer, "correct"},
    {LearnerEventKind::Mistake, "mistake"},
    {LearnerEventKind::HelpRequest, "help"},
    {LearnerEventKind::InquiryResponse, "inquiry_response"},
}};

}  // namespace

std::string_view to_string(ActCategory category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  return "disclosure";
}

ActCategory act_category_from_string(std::string_view text) {
  for (const auto& [c, name] : kCategoryNames) {
    if (name == text) return c;
  }
  throw ProtocolError("unknown act category '" + std::string(text) + "'");
}

bool SarAct::is_promise_fulfillment() const {
  const auto* p = std::get_if<PromisePayload>(&payload);
  return category == ActCategory::Promise && p != nullptr && p->fulfillment;
}

std::string_view to_string(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::OpeningDisclosure: return "opening_disclosure";
    case SessionPhase::OpeningPromise: return "opening_promise";
    case SessionPhase::GameLoop: return "game_loop";
    case SessionPhase::ClosingPromiseFulfillment: return "closing_promise_fulfillment";
    case SessionPhase::ClosingInquiry: return "closing_inquiry";
    case SessionPhase::Ended: return "ended";
  }
  return "ended";
}

bool act_legal_in_phase(ActCategory category, SessionPhase phase) {
  switch (phase) {
    case SessionPhase::OpeningDisclosure: return category == ActCategory::Disclosure;
    case SessionPhase::OpeningPromise: return category == ActCategory::Promise;
    case SessionPhase::GameLoop:
      return category == ActCategory::Instruction || category == ActCategory::Feedback;
    case SessionPhase::ClosingPromiseFulfillment: return category == ActCategory::Promise;
    case SessionPhase::ClosingInquiry: return category == ActCategory::Inquiry;
    case SessionPhase::Ended: return false;
  }
  return false;
}

std::string_view to_string(LearnerEventKind kind) {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "session_start";
}

LearnerEventKind learner_event_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kEventNames) {
    if (name == text) return k;
  }
  throw ProtocolError("unknown learner event kind '" + std::string(text) + "'");
}

nlohmann::json to_json(const SarAct& act) {
  nlohmann::json j{{"category", to_string(act.category)}, {"utterance", act.utterance}};
  if (const auto* p = std::get_if<InstructionPayload>(&act.payload)) {
    j["game"] = p->game;
    j["level"] = p->level.value();
    j["problem_seed"] = p->problem_seed;
  } else if (const auto* p = std::get_if<FeedbackPayload>(&act.payload)) {
    j["game"] = p->game;
    j["level"] = p->level.value();
    j["hint"] = p->hint;
  } else if (const auto* p = std::get_if<PromisePayload>(&act.payload)) {
    j["fulfillment"] = p->fulfillment;
    j["planet"] = p->planet;
  }
  return j;
}

SarAct sar_act_from_json(const nlohmann::json& j) {
  SarAct act;
  act.category = act_category_from_string(j.at("category").get<std::string>());
  act.utterance = j.at("utterance").get<std::string>();
  switch (act.category) {
    case ActCategory::Instruction:
      act.payload = InstructionPayload{j.at("game").get<std::size_t>(), ChallengeLevel(j.at("level").get<int>()),
                                       j.at("problem_seed").get<std::uint64_t>()};
      break;
    case ActCategory::Feedback:
      act.payload = FeedbackPayload{j.at("game").get<std::size_t>(), FeedbackLevel(j.at("level").get<int>()),
                                    j.at("hint").get<std::string>()};
      break;
    case ActCategory::Promise:
      act.payload = PromisePayload{j.at("fulfillment").get<bool>(), j.value("planet", std::string{})};
      break;
    default:
      break;
  }
  return act;
}

nlohmann::json to_json(const LearnerEvent& event) {
  return {{"kind", to_string(event.kind)}, {"timestamp", event.timestamp}, {"payload", event.payload}};
}

LearnerEvent learner_event_from_json(const nlohmann::json& j) {
  LearnerEvent event;
  event.kind = learner_event_kind_from_string(j.at("kind").get<std::string>());
  event.timestamp = j.value("timestamp", std::int64_t{0});
  event.payload = j.value("payload", std::string{});
  return event;
}

}  // namespace hhrl
