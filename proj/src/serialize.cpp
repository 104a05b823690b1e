#include "led/serialize.hpp"

#include "led/errors.hpp"

namespace led {
namespace {

using nlohmann::json;

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

json candidates_json(const std::vector<Candidate>& candidates) {
  json out = json::array();
  for (const auto& c : candidates) out.push_back(to_json(c));
  return out;
}

}  // namespace

std::string_view to_string(RewriteBackend backend) {
  return backend == RewriteBackend::External ? "external" : "baseline";
}

json to_json(const Candidate& c) {
  return {{"text", c.text},
          {"gen_score", c.gen_score},
          {"verdict", c.verdict ? json(std::string(to_string(*c.verdict))) : json(nullptr)},
          {"reason", c.reason}};
}

json to_json(const ScoredSpan& s) {
  return {{"passage_id", s.passage_id}, {"start", s.start},         {"end", s.end},
          {"text", s.text},             {"span_score", s.span_score}, {"bm25", s.bm25},
          {"bm25_norm", s.bm25_norm},   {"fused", s.fused}};
}

json to_json(const ScoredPassage& p) { return {{"passage_id", p.passage_id}, {"bm25", p.bm25}}; }

json to_json(const Substitution& s) {
  return {{"start", s.start}, {"end", s.end}, {"surface", s.surface}, {"entity_type", optional_json(s.entity_type)}};
}

json to_json(const Turn& t) {
  return {{"user", t.user.text()},
          {"rewritten", t.rewritten.text()},
          {"route", std::string(to_string(t.route))},
          {"response", t.response},
          {"candidates", candidates_json(t.candidates)},
          {"fused", t.fused ? to_json(*t.fused) : json(nullptr)}};
}

Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.text = j.at("text").get<std::string>();
  c.gen_score = j.at("gen_score").get<double>();
  if (j.contains("verdict") && !j["verdict"].is_null()) c.verdict = verdict_from_string(j["verdict"].get<std::string>());
  c.reason = j.value("reason", std::string());
  return c;
}

ScoredSpan span_from_json(const json& j) {
  ScoredSpan s;
  s.passage_id = j.at("passage_id").get<std::string>();
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.text = j.at("text").get<std::string>();
  s.span_score = j.at("span_score").get<double>();
  s.bm25 = j.at("bm25").get<double>();
  s.bm25_norm = j.at("bm25_norm").get<double>();
  s.fused = j.at("fused").get<double>();
  return s;
}

Turn turn_from_json(const json& j) {
  try {
    Turn t;
    t.user = Utterance(j.at("user").get<std::string>());
    t.rewritten = Utterance(j.at("rewritten").get<std::string>());
    t.route = route_from_string(j.at("route").get<std::string>());
    t.response = j.at("response").get<std::string>();
    for (const auto& c : j.value("candidates", json::array())) t.candidates.push_back(candidate_from_json(c));
    if (j.contains("fused") && !j["fused"].is_null()) t.fused = span_from_json(j["fused"]);
    return t;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed turn record: ") + e.what());
  }
}

json to_json(const TurnTrace& t, bool with_latency) {
  json subs = json::array();
  for (const auto& s : t.substitutions) subs.push_back(to_json(s));
  json out = {
      {"turn_no", t.turn_no},
      {"user", t.user_text},
      {"rewritten", t.rewritten},
      {"substitutions", subs},
      {"rewrite_backend", std::string(to_string(t.rewrite_backend))},
      {"factual_score", t.factual_score},
      {"routed", std::string(to_string(t.routed))},
      {"route", std::string(to_string(t.answered))},
      {"fell_through", t.fell_through},
  };
  if (t.retrieval) {
    json r = json::array();
    for (const auto& p : *t.retrieval) r.push_back(to_json(p));
    out["retrieval"] = r;
  } else {
    out["retrieval"] = nullptr;
  }
  out["span"] = t.span ? to_json(*t.span) : json(nullptr);
  out["paraphrase"] = optional_json(t.paraphrase);
  out["generated"] = t.generated ? candidates_json(*t.generated) : json(nullptr);
  out["candidates"] = candidates_json(t.gated);
  out["fallback"] = t.fallback_emitted;
  out["response"] = t.response;
  out["backend_fallbacks"] = t.backend_fallbacks;
  if (with_latency) out["latency_ms"] = t.latency_ms;
  return out;
}

json trace_summary(const TurnTrace& t) {
  json verdicts = json::array();
  for (const auto& c : t.gated) {
    verdicts.push_back({{"text", c.text},
                        {"gen_score", c.gen_score},
                        {"verdict", c.verdict ? json(std::string(to_string(*c.verdict))) : json(nullptr)}});
  }
  json out = {{"factual_score", t.factual_score},
              {"routed", std::string(to_string(t.routed))},
              {"fell_through", t.fell_through},
              {"substitutions", t.substitutions.size()},
              {"fused", t.span ? json(t.span->fused) : json(nullptr)},
              {"passage_id", t.span ? json(t.span->passage_id) : json(nullptr)},
              {"candidates", verdicts},
              {"fallback", t.fallback_emitted},
              {"backend_fallbacks", t.backend_fallbacks},
              {"latency_ms", t.latency_ms}};
  return out;
}

}  // namespace led
