#include <doctest.h>

#include <fstream>

#include "led/config.hpp"
#include "led/errors.hpp"
#include "led/pipeline.hpp"
#include "led/resolver.hpp"
#include "led/serialize.hpp"
#include "led/safety.hpp"
#include "led/text.hpp"

namespace {

const led::Engine& fixture_engine() {
  static const led::Engine engine(led::load_config(LED_FIXTURE_DIR "/config.json"));
  return engine;
}

std::vector<std::string> fixture_script() {
  std::ifstream in(LED_FIXTURE_DIR "/script.txt");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!led::trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("factual turn follows each stage contract") {
  const auto& engine = fixture_engine();
  auto state = engine.new_session("t");
  const auto r = engine.process_turn(state, "When was the movie Skyfall released?");
  CHECK(r.turn.route == led::Route::Factual);
  CHECK(r.trace.routed == led::Route::Factual);
  CHECK(r.trace.factual_score >= engine.config().router.threshold);

  // Recompute each stage from its own public operation.
  const led::Utterance rewritten(r.trace.rewritten);
  const auto answer = led::answer_factual(*engine.index(), rewritten, engine.config().top_k, engine.config().alpha);
  REQUIRE(answer.best.has_value());
  REQUIRE(r.trace.span.has_value());
  CHECK(*r.trace.span == *answer.best);
  CHECK(r.trace.span->passage_id == answer.retrieved.front().passage_id);
  CHECK(r.trace.span->text.find("2012") != std::string::npos);
  CHECK(r.response == led::paraphrase(answer.best->text, rewritten));
  REQUIRE(r.trace.gated.size() == 1);
  CHECK(r.trace.gated[0].gen_score == answer.best->fused);
  CHECK(r.trace.gated[0].verdict == led::Verdict::Pass);
  CHECK(state.turns.size() == 1);
  CHECK(state.turns[0].fused == answer.best);
}

TEST_CASE("follow-up is rewritten with the previous entity") {
  const auto& engine = fixture_engine();
  auto state = engine.new_session("t");
  engine.process_turn(state, "When was the movie Skyfall released?");
  const auto r = engine.process_turn(state, "Do you like it?");
  CHECK(r.trace.rewritten.find("Skyfall") != std::string::npos);
  CHECK(r.turn.route == led::Route::Subjective);
  CHECK_FALSE(r.trace.substitutions.empty());
  CHECK(r.trace.generated.has_value());
}

TEST_CASE("factual no-answer falls through to generation") {
  const auto& engine = fixture_engine();
  auto state = engine.new_session("t");
  const auto r = engine.process_turn(state, "When was the Eiffel Tower built?");
  CHECK(r.trace.routed == led::Route::Factual);
  CHECK(r.trace.fell_through);
  CHECK(r.turn.route == led::Route::Subjective);
  CHECK(r.trace.generated.has_value());
  CHECK_FALSE(r.response.empty());
}

TEST_CASE("toxic bank candidate is skipped") {
  const auto& engine = fixture_engine();
  auto state = engine.new_session("t");
  const auto r = engine.process_turn(state, "Tell me a joke about movies");
  REQUIRE_FALSE(r.trace.gated.empty());
  CHECK(r.trace.gated[0].verdict == led::Verdict::Toxic);
  CHECK_FALSE(led::check_toxic(r.response, engine.safety()));
  CHECK_FALSE(r.trace.fallback_emitted);
}

TEST_CASE("script runs are deterministic") {
  const auto& engine = fixture_engine();
  const auto a = led::run_script(engine, fixture_script());
  const auto b = led::run_script(engine, fixture_script());
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(led::to_json(a[i].trace, false) == led::to_json(b[i].trace, false));
    CHECK(a[i].trace.turn_no == static_cast<int>(i + 1));
    for (const auto& [stage, ms] : a[i].trace.latency_ms) CHECK(ms >= 0.0);
  }
  CHECK_THROWS_AS(led::run_script(engine, {}), led::InvalidInput);
}

TEST_CASE("empty utterance is rejected without touching the session") {
  const auto& engine = fixture_engine();
  auto state = engine.new_session("t");
  CHECK_THROWS_AS(engine.process_turn(state, "   "), led::InvalidInput);
  CHECK(state.turns.empty());
}

TEST_CASE("unreachable backends fall back to the baselines") {
  auto config = led::load_config(LED_FIXTURE_DIR "/config.json");
  const led::RemoteEndpoint dead{"http://127.0.0.1:1", std::chrono::milliseconds(200)};
  config.backends.rewriter = dead;
  config.backends.generator = dead;
  config.backends.extractor = dead;
  config.backends.paraphraser = dead;
  const led::Engine remote(config);
  const auto with = led::run_script(remote, {"When was the movie Skyfall released?", "Do you like it?"});
  const auto without = led::run_script(fixture_engine(), {"When was the movie Skyfall released?", "Do you like it?"});
  for (std::size_t i = 0; i < with.size(); ++i) {
    CHECK(with[i].response == without[i].response);
    CHECK(with[i].trace.rewritten == without[i].trace.rewritten);
    CHECK_FALSE(with[i].trace.backend_fallbacks.empty());
  }
  const auto& f0 = with[0].trace.backend_fallbacks;
  CHECK(std::find(f0.begin(), f0.end(), "rewriter") != f0.end());
  CHECK(std::find(f0.begin(), f0.end(), "extractor") != f0.end());
  CHECK(std::find(f0.begin(), f0.end(), "paraphraser") != f0.end());
  const auto& f1 = with[1].trace.backend_fallbacks;
  CHECK(std::find(f1.begin(), f1.end(), "generator") != f1.end());
}

TEST_CASE("engine needs a subjective response source") {
  auto config = led::parse_config(nlohmann::json::object(), "/");
  CHECK_THROWS_AS(led::Engine{config}, led::InvalidInput);
}

TEST_CASE("turn json round trip") {
  const auto& engine = fixture_engine();
  auto state = engine.new_session("t");
  const auto r = engine.process_turn(state, "When was the movie Skyfall released?");
  const auto back = led::turn_from_json(led::to_json(r.turn));
  CHECK(back.user == r.turn.user);
  CHECK(back.rewritten == r.turn.rewritten);
  CHECK(back.route == r.turn.route);
  CHECK(back.response == r.turn.response);
  CHECK(back.candidates == r.turn.candidates);
  CHECK(back.fused == r.turn.fused);
}
