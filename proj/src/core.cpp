#include "led/core.hpp"

#include "led/errors.hpp"
#include "led/resolver.hpp"
#include "led/text.hpp"

namespace led {

Utterance::Utterance(std::string_view text) : text_(normalize_nfc(text)) {
  if (trim(text_).empty()) throw InvalidInput("utterance text is empty");
  tokens_ = tokenize(text_);
}

std::string_view to_string(Route route) {
  return route == Route::Factual ? "factual" : "subjective";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Inconsistent: return "inconsistent";
    case Verdict::Toxic: return "toxic";
  }
  return "pass";
}

Route route_from_string(std::string_view s) {
  if (s == "factual") return Route::Factual;
  if (s == "subjective") return Route::Subjective;
  throw InvalidInput("unknown route: " + std::string(s));
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "inconsistent") return Verdict::Inconsistent;
  if (s == "toxic") return Verdict::Toxic;
  throw InvalidInput("unknown verdict: " + std::string(s));
}

bool Turn::trim_empty(const std::string& s) { return trim(s).empty(); }

void append_turn(ConversationState& state, Turn turn, const Gazetteer& gazetteer, double decay) {
  if (!turn.completed()) throw InvalidInput("cannot append a turn without a response");
  const int turn_no = static_cast<int>(state.turns.size()) + 1;
  const auto& source = turn.rewritten.text().empty() ? turn.user.text() : turn.rewritten.text();
  auto mentioned = extract_entities(source, gazetteer);
  for (auto& e : mentioned) e.last_turn = turn_no;
  state.entities = decay_and_merge(std::move(state.entities), std::move(mentioned), decay);
  state.turns.push_back(std::move(turn));
}

std::vector<ContextPair> context_window(const ConversationState& state, std::size_t n) {
  const std::size_t count = std::min(n, state.turns.size());
  std::vector<ContextPair> out;
  out.reserve(count);
  for (std::size_t i = state.turns.size() - count; i < state.turns.size(); ++i) {
    out.push_back({state.turns[i].user.text(), state.turns[i].response});
  }
  return out;
}

}  // namespace led
