#pragma once

// Domain types shared by every pipeline stage and the per-session
// conversation state.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace led {

class Gazetteer;

/// A user or rewritten query. `text` is NFC-normalized; `tokens` is always
/// exactly `tokenize(text)`.
class Utterance {
 public:
  Utterance() = default;

  /// Throws InvalidInput when the text is empty after trimming.
  explicit Utterance(std::string_view text);

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Utterance&, const Utterance&) = default;

 private:
  std::string text_;
  std::vector<std::string> tokens_;
};

struct Entity {
  std::string surface;
  std::optional<std::string> entity_type;
  int last_turn = 0;
  double salience = 1.0;

  friend bool operator==(const Entity&, const Entity&) = default;
};

enum class Route { Factual, Subjective };

enum class Verdict { Pass, Inconsistent, Toxic };

std::string_view to_string(Route route);
std::string_view to_string(Verdict verdict);
Route route_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);

struct Candidate {
  std::string text;
  double gen_score = 0.0;
  std::optional<Verdict> verdict;
  std::string reason;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// An extracted answer span with its retrieval, extraction and fused scores.
struct ScoredSpan {
  std::string passage_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  double span_score = 0.0;
  double bm25 = 0.0;
  double bm25_norm = 0.0;
  double fused = 0.0;

  friend bool operator==(const ScoredSpan&, const ScoredSpan&) = default;
};

struct Turn {
  Utterance user;
  Utterance rewritten;
  Route route = Route::Subjective;
  std::string response;
  std::vector<Candidate> candidates;
  std::optional<ScoredSpan> fused;

  bool completed() const { return !trim_empty(response); }

 private:
  static bool trim_empty(const std::string& s);
};

inline constexpr std::size_t kDefaultMaxContext = 3;
inline constexpr double kDefaultDecay = 0.5;

struct ConversationState {
  std::string session_id;
  std::vector<Turn> turns;
  std::vector<Entity> entities;  // most salient first
  std::size_t max_context = kDefaultMaxContext;
};

/// Appends a completed turn and refreshes the entity stack from the turn's
/// rewritten query. Throws InvalidInput for an incomplete turn.
void append_turn(ConversationState& state, Turn turn, const Gazetteer& gazetteer,
                 double decay = kDefaultDecay);

struct ContextPair {
  std::string user;
  std::string response;

  friend bool operator==(const ContextPair&, const ContextPair&) = default;
};

/// The last min(n, turns) (user, response) pairs, oldest first.
std::vector<ContextPair> context_window(const ConversationState& state, std::size_t n);

}  // namespace led
