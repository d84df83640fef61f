#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "hhrl/core/levels.hpp"

namespace hhrl {

// The five abstract categories of robot action.
enum class ActCategory { Disclosure, Promise, Instruction, Feedback, Inquiry };

std::string_view to_string(ActCategory category);
ActCategory act_category_from_string(std::string_view text);

struct InstructionPayload {
  std::size_t game = 0;
  ChallengeLevel level{ChallengeLevel::kMin};
  // Seed the client uses to generate the concrete problem instance.
  std::uint64_t problem_seed = 0;

  friend bool operator==(const InstructionPayload&, const InstructionPayload&) = default;
};

struct FeedbackPayload {
  std::size_t game = 0;
  FeedbackLevel level{FeedbackLevel::kMin};
  std::string hint;

  friend bool operator==(const FeedbackPayload&, const FeedbackPayload&) = default;
};

struct PromisePayload {
  // false for the opening commitment, true for the closing fulfillment.
  bool fulfillment = false;
  std::string planet;

  friend bool operator==(const PromisePayload&, const PromisePayload&) = default;
};

using ActPayload = std::variant<std::monostate, InstructionPayload, FeedbackPayload, PromisePayload>;

struct SarAct {
  ActCategory category = ActCategory::Disclosure;
  std::string utterance;
  ActPayload payload;

  bool is_promise_fulfillment() const;

  friend bool operator==(const SarAct&, const SarAct&) = default;
};

enum class SessionPhase {
  OpeningDisclosure,
  OpeningPromise,
  GameLoop,
  ClosingPromiseFulfillment,
  ClosingInquiry,
  Ended,
};

std::string_view to_string(SessionPhase phase);

// Whether a robot act of `category` may be emitted while in `phase`.
bool act_legal_in_phase(ActCategory category, SessionPhase phase);

enum class LearnerEventKind { SessionStart, CorrectAnswer, Mistake, HelpRequest, InquiryResponse };

std::string_view to_string(LearnerEventKind kind);
LearnerEventKind learner_event_kind_from_string(std::string_view text);

struct LearnerEvent {
  LearnerEventKind kind = LearnerEventKind::SessionStart;
  std::int64_t timestamp = 0;
  // Raw answer content, logged verbatim.
  std::string payload;

  friend bool operator==(const LearnerEvent&, const LearnerEvent&) = default;
};

nlohmann::json to_json(const SarAct& act);
SarAct sar_act_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LearnerEvent& event);
LearnerEvent learner_event_from_json(const nlohmann::json& j);

}  // namespace hhrl
