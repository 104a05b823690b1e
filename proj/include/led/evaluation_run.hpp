#pragma once

// Runs the engine over a dialog dataset and scores the outputs against the
// dataset's gold fields.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "led/data.hpp"
#include "led/eval.hpp"
#include "led/pipeline.hpp"

namespace led {

/// Metric names accepted in a selection.
inline const std::set<std::string> kEvalMetrics = {"rouge", "f1", "em", "recall", "mrr", "perplexity", "ssa"};

struct EvalOptions {
  std::set<std::string> metrics = {"rouge", "f1", "em", "recall", "mrr", "perplexity"};
  std::size_t recall_k = 10;
  std::vector<SsaLabel> ssa_labels;  // used by "ssa"
};

/// Parses "rouge,f1,..." (or "all"). Throws InvalidInput on an unknown name.
std::set<std::string> parse_metric_selection(const std::string& list);

struct MetricValue {
  std::string name;
  double value = 0.0;
  std::size_t count = 0;  // records the value averages over
};

/// Per-record pipeline output kept for inspection and re-scoring.
struct EvalTurn {
  std::string conversation_id;
  int turn_no = 0;
  std::string rewritten;
  Route route = Route::Subjective;
  bool fell_through = false;
  std::string response;
  std::optional<std::string> answer_span;  // extracted span on the factual path
  std::vector<std::string> ranked_urls;    // retrieval for the rewritten query
};

struct EvalReport {
  std::size_t records = 0;
  std::size_t conversations = 0;
  std::vector<MetricValue> metrics;
  std::vector<std::string> warnings;  // skipped metrics and why
  std::vector<EvalTurn> turns;

  const MetricValue* find(std::string_view name) const;
  nlohmann::json to_json() const;
  std::string table() const;
};

/// Conversations are replayed in a fresh session each, turns in turn_no
/// order. Throws InvalidInput on an empty dataset.
EvalReport run_evaluation(const Engine& engine, const std::vector<DialogTurnRecord>& records,
                          const EvalOptions& options);

}  // namespace led
