#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hhrl/core/random.hpp"
#include "hhrl/core/session.hpp"

namespace hhrl {

// Utterance catalogs for the non-learning controllers. Entries may contain
// the placeholders {planet} and {games}.
struct ScriptCatalog {
  std::vector<std::string> disclosures;
  std::vector<std::string> promises;
  std::vector<std::string> fulfillments;
  std::vector<std::string> inquiries;
  std::vector<std::string> planets;

  static ScriptCatalog defaults();
  // Throws ConfigError when any list is empty.
  void validate(std::string_view path = "scripts") const;
};

// Graded-cueing hint texts for feedback levels 1-4, plus the bail-out line.
struct HintCatalog {
  std::array<std::string, 4> hints;
  std::string bail_out;

  static HintCatalog defaults();
  void validate(std::string_view path = "hints") const;
  const std::string& text_for(FeedbackLevel level) const;
};

enum class ScriptKind { Disclosure, Promise, Fulfillment, Inquiry };

struct ScriptContext {
  std::size_t session_index = 0;
  std::size_t games_planned = 0;
};

// Picks utterances for disclosures, promises and inquiries. Choice is seeded
// random, never repeating the previous pick of the same kind.
class ScriptController {
 public:
  // Last pick per kind; carried between sessions so consecutive sessions do
  // not open with the same line.
  using Memory = std::array<std::optional<std::size_t>, 4>;

  explicit ScriptController(ScriptCatalog catalog, Memory memory = {});

  SarAct act(ScriptKind kind, const ScriptContext& context, Rng& rng);

  // Planet the session travels to; fixed per session index.
  std::string planet_for(std::size_t session_index) const;
  const Memory& memory() const { return last_; }

 private:
  std::size_t pick(ScriptKind kind, std::size_t n, Rng& rng);

  ScriptCatalog catalog_;
  Memory last_;
};

}  // namespace hhrl
