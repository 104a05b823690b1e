#include "led/pipeline.hpp"

#include <chrono>

#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

class StageTimer {
 public:
  StageTimer(TurnTrace& trace, std::string stage)
      : trace_(trace), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    trace_.latency_ms[stage_] += std::chrono::duration<double, std::milli>(elapsed).count();
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  TurnTrace& trace_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

Engine::Engine(PipelineConfig config) : config_(std::move(config)) {
  const auto& res = config_.resources;
  if (res.gazetteer) gazetteer_ = Gazetteer::load(*res.gazetteer);

  if (res.router_model) {
    router_ = load_router_model(*res.router_model);
  } else if (res.router_training) {
    router_ = train_router(load_labeled_questions(*res.router_training), config_.router_training);
  } else {
    router_ = RouterModel::zeros(config_.router_training.dim, config_.router_training.seed);
  }

  if (res.index) {
    index_ = PassageIndex::load(*res.index);
  } else if (res.corpus) {
    index_ = PassageIndex::build(load_corpus(*res.corpus), config_.bm25);
  }

  if (res.bank) bank_ = ResponseBank::load(*res.bank);

  std::vector<std::string> blocklist;
  if (res.blocklist) blocklist = SafetyConfig::load_blocklist(*res.blocklist);
  safety_ = std::make_unique<SafetyConfig>(std::move(blocklist), config_.fallback_text, config_.jaccard_threshold);

  const auto& be = config_.backends;
  if (be.rewriter) remote_rewriter_ = std::make_unique<RemoteRewriter>(*be.rewriter);
  if (be.generator) remote_generator_ = std::make_unique<RemoteCandidateBackend>(*be.generator);
  if (be.lm) lm_ = std::make_unique<RemoteLm>(*be.lm);
  if (be.extractor) remote_extractor_ = std::make_unique<RemoteExtractor>(*be.extractor);
  if (be.paraphraser) remote_paraphraser_ = std::make_unique<RemoteParaphraser>(*be.paraphraser);

  if (bank_.empty() && !remote_generator_ && !lm_) {
    throw InvalidInput("no subjective response source: configure a response bank or a generator backend");
  }
}

ConversationState Engine::new_session(std::string session_id) const {
  ConversationState state;
  state.session_id = std::move(session_id);
  state.max_context = config_.max_context;
  return state;
}

RewriteResult Engine::resolve(const Utterance& query, const ConversationState& state, TurnTrace& trace) const {
  if (remote_rewriter_) {
    try {
      auto text = remote_rewriter_->rewrite(query.text(), context_window(state, state.max_context));
      return RewriteResult{Utterance(text), {}, RewriteBackend::External};
    } catch (const Error&) {
      trace.backend_fallbacks.push_back("rewriter");
    }
  }
  return rewrite(query, state, gazetteer_);
}

FactualAnswer Engine::retrieve(const Utterance& rewritten, std::vector<std::string>* fallbacks) const {
  if (!index_) return {};
  if (remote_extractor_) {
    try {
      return answer_factual(*index_, rewritten, config_.top_k, config_.alpha,
                            [this](const Passage& p, const Utterance& q) { return remote_extractor_->extract(p, q); });
    } catch (const Error&) {
      if (fallbacks) fallbacks->push_back("extractor");
    }
  }
  return answer_factual(*index_, rewritten, config_.top_k, config_.alpha);
}

std::vector<Candidate> Engine::generate(const ConversationState& state, const Utterance& rewritten,
                                        TurnTrace& trace) const {
  GeneratorResources resources{&bank_, lm_.get(), config_.decode, remote_generator_.get()};
  try {
    return generate_candidates(state, rewritten, config_.candidates, resources);
  } catch (const Error&) {
    if (bank_.empty()) throw;
    trace.backend_fallbacks.push_back(remote_generator_ ? "generator" : "lm");
  }
  return generate_candidates(state, rewritten, config_.candidates, GeneratorResources{&bank_, nullptr, {}, nullptr});
}

TurnResult Engine::process_turn(ConversationState& state, std::string_view user_text) const {
  TurnResult result;
  auto& trace = result.trace;
  auto& turn = result.turn;
  trace.turn_no = static_cast<int>(state.turns.size()) + 1;
  turn.user = Utterance(user_text);
  trace.user_text = turn.user.text();

  {
    StageTimer t(trace, "resolver");
    auto rewritten = resolve(turn.user, state, trace);
    turn.rewritten = rewritten.rewritten;
    trace.rewritten = rewritten.rewritten.text();
    trace.substitutions = std::move(rewritten.substitutions);
    trace.rewrite_backend = rewritten.backend;
  }
  {
    StageTimer t(trace, "router");
    trace.factual_score = score_factual(router_, turn.rewritten.text());
    trace.routed = route(trace.factual_score, config_.router);
  }

  std::vector<Candidate> candidates;
  if (trace.routed == Route::Factual) {
    StageTimer t(trace, "knowledge");
    auto answer = retrieve(turn.rewritten, &trace.backend_fallbacks);
    trace.retrieval = answer.retrieved;
    if (answer.best) {
      std::string text;
      if (remote_paraphraser_) {
        try {
          text = cap_words(remote_paraphraser_->paraphrase(answer.best->text, turn.rewritten,
                                                           context_window(state, state.max_context)));
        } catch (const Error&) {
          trace.backend_fallbacks.push_back("paraphraser");
        }
      }
      if (text.empty()) text = paraphrase(answer.best->text, turn.rewritten);
      trace.span = answer.best;
      trace.paraphrase = text;
      turn.fused = answer.best;
      candidates.push_back({text, answer.best->fused, {}, {}});
      trace.answered = Route::Factual;
    } else {
      trace.fell_through = true;
    }
  }
  if (candidates.empty()) {
    StageTimer t(trace, "generator");
    candidates = generate(state, turn.rewritten, trace);
    trace.generated = candidates;
    trace.answered = Route::Subjective;
  }

  {
    StageTimer t(trace, "safety");
    auto gated = gate(std::move(candidates), state, *safety_);
    trace.gated = gated.candidates;
    trace.fallback_emitted = gated.fallback;
    turn.candidates = std::move(gated.candidates);
    turn.response = std::move(gated.response);
  }

  turn.route = trace.answered;
  trace.response = turn.response;
  result.response = turn.response;
  append_turn(state, turn, gazetteer_, config_.decay);
  return result;
}

std::vector<TurnResult> run_script(const Engine& engine, const std::vector<std::string>& script,
                                   const std::string& session_id) {
  if (script.empty()) throw InvalidInput("script is empty");
  auto state = engine.new_session(session_id);
  std::vector<TurnResult> out;
  out.reserve(script.size());
  for (const auto& line : script) out.push_back(engine.process_turn(state, line));
  return out;
}

}  // namespace led
