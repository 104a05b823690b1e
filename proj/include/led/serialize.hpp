#pragma once

// JSON forms of turns and traces, shared by the HTTP service, the session
// log and the golden-trace files.

#include <json.hpp>

#include "led/core.hpp"
#include "led/pipeline.hpp"

namespace led {

nlohmann::json to_json(const Candidate& candidate);
nlohmann::json to_json(const ScoredSpan& span);
nlohmann::json to_json(const ScoredPassage& passage);
nlohmann::json to_json(const Substitution& substitution);
nlohmann::json to_json(const Turn& turn);

Candidate candidate_from_json(const nlohmann::json& j);
ScoredSpan span_from_json(const nlohmann::json& j);
Turn turn_from_json(const nlohmann::json& j);

/// Full trace. Latencies vary run to run, so they can be left out for
/// reproducible output.
nlohmann::json to_json(const TurnTrace& trace, bool with_latency = true);

/// Compact trace for chat responses: scores, verdicts and latencies.
nlohmann::json trace_summary(const TurnTrace& trace);

std::string_view to_string(RewriteBackend backend);

}  // namespace led
