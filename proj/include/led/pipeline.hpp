#pragma once

// One conversational turn end to end: resolve references, classify, answer
// from the corpus or generate a subjective reply, then gate for safety.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "led/backend.hpp"
#include "led/config.hpp"
#include "led/core.hpp"
#include "led/generator.hpp"
#include "led/knowledge.hpp"
#include "led/resolver.hpp"
#include "led/router.hpp"
#include "led/safety.hpp"

namespace led {

struct TurnTrace {
  int turn_no = 0;
  std::string user_text;
  std::string rewritten;
  std::vector<Substitution> substitutions;
  RewriteBackend rewrite_backend = RewriteBackend::Baseline;
  double factual_score = 0.0;
  Route routed = Route::Subjective;  // classifier decision
  Route answered = Route::Subjective;  // path that produced the response
  bool fell_through = false;           // factual no-answer handed to generation
  std::optional<std::vector<ScoredPassage>> retrieval;
  std::optional<ScoredSpan> span;
  std::optional<std::string> paraphrase;
  std::optional<std::vector<Candidate>> generated;  // subjective candidates before gating
  std::vector<Candidate> gated;                     // every gated candidate with its verdict
  bool fallback_emitted = false;
  std::string response;
  std::vector<std::string> backend_fallbacks;  // stages whose external backend failed
  std::map<std::string, double> latency_ms;
};

struct TurnResult {
  std::string response;
  Turn turn;
  TurnTrace trace;
};

/// Loaded resources plus stage configuration. Immutable after construction
/// and safe to share across sessions.
class Engine {
 public:
  /// Loads or builds every configured resource. Throws on any failure.
  explicit Engine(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const Gazetteer& gazetteer() const noexcept { return gazetteer_; }
  const RouterModel& router() const noexcept { return router_; }
  const PassageIndex* index() const noexcept { return index_ ? &*index_ : nullptr; }
  const ResponseBank& bank() const noexcept { return bank_; }
  const SafetyConfig& safety() const noexcept { return *safety_; }
  const LmBackend* language_model() const noexcept { return lm_.get(); }

  ConversationState new_session(std::string session_id) const;

  /// Processes one user utterance and appends the completed turn to `state`.
  /// The caller must serialize turns per session.
  TurnResult process_turn(ConversationState& state, std::string_view user_text) const;

  /// Retrieval and fused answer for an already rewritten query.
  FactualAnswer retrieve(const Utterance& rewritten, std::vector<std::string>* fallbacks = nullptr) const;

 private:
  RewriteResult resolve(const Utterance& query, const ConversationState& state, TurnTrace& trace) const;
  std::vector<Candidate> generate(const ConversationState& state, const Utterance& rewritten, TurnTrace& trace) const;

  PipelineConfig config_;
  Gazetteer gazetteer_;
  RouterModel router_;
  std::optional<PassageIndex> index_;
  ResponseBank bank_;
  std::unique_ptr<SafetyConfig> safety_;
  std::unique_ptr<RemoteRewriter> remote_rewriter_;
  std::unique_ptr<RemoteCandidateBackend> remote_generator_;
  std::unique_ptr<LmBackend> lm_;
  std::unique_ptr<RemoteExtractor> remote_extractor_;
  std::unique_ptr<RemoteParaphraser> remote_paraphraser_;
};

/// Runs a script through a fresh session. Throws InvalidInput on an empty script.
std::vector<TurnResult> run_script(const Engine& engine, const std::vector<std::string>& script,
                                   const std::string& session_id = "script");

}  // namespace led
