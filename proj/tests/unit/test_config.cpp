#include <doctest.h>

#include "led/config.hpp"
#include "led/errors.hpp"
#include "led/safety.hpp"

using nlohmann::json;

TEST_CASE("defaults fill an empty tree") {
  const auto c = led::parse_config(json::object(), "/base");
  CHECK(c.router.threshold == 0.8);
  CHECK(c.top_k == 10);
  CHECK(c.alpha == 0.5);
  CHECK(c.bm25 == led::Bm25Params{1.2, 0.75});
  CHECK(c.candidates == 3);
  CHECK(c.decode.mode == led::DecodeMode::Beam);
  CHECK(c.decode.beam_width == 4);
  CHECK(c.decode.k == 10);
  CHECK_FALSE(c.decode.length_normalize);
  CHECK(c.max_context == 3);
  CHECK(c.decay == 0.5);
  CHECK(c.fallback_text == led::kDefaultFallback);
  CHECK_FALSE(c.resources.corpus.has_value());
  CHECK_FALSE(c.backends.generator.has_value());
  CHECK(c.server.max_concurrent_turns == 64);
}

TEST_CASE("relative paths resolve against the base directory") {
  const auto c = led::parse_config({{"resources", {{"corpus", "data/c.jsonl"}, {"bank", "/abs/bank.jsonl"}}}}, "/base");
  CHECK(*c.resources.corpus == std::filesystem::path("/base/data/c.jsonl"));
  CHECK(*c.resources.bank == std::filesystem::path("/abs/bank.jsonl"));
}

TEST_CASE("environment overrides") {
  const std::map<std::string, std::string> env{{"LED_ROUTER_THRESHOLD", "0.75"},
                                               {"LED_GENERATOR_MODE", "topk"},
                                               {"LED_BACKENDS_LM_URL", "http://127.0.0.1:9"},
                                               {"LED_RESOURCES_CORPUS", "x.jsonl"}};
  const auto c = led::parse_config(json::object(), "/b", env);
  CHECK(c.router.threshold == 0.75);
  CHECK(c.decode.mode == led::DecodeMode::TopK);
  REQUIRE(c.backends.lm.has_value());
  CHECK(c.backends.lm->base_url == "http://127.0.0.1:9");
  CHECK(*c.resources.corpus == std::filesystem::path("/b/x.jsonl"));
  CHECK_THROWS_AS(led::parse_config(json::object(), "/b", {{"LED_ROUTER_THRESHOLD", "abc"}}), led::InvalidInput);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(led::parse_config({{"version", 2}}, "/"), led::InvalidInput);
  CHECK_THROWS_AS(led::parse_config({{"router", {{"threshold", 1.5}}}}, "/"), led::InvalidInput);
  CHECK_THROWS_AS(led::parse_config({{"retrieval", {{"alpha", -0.1}}}}, "/"), led::InvalidInput);
  CHECK_THROWS_AS(led::parse_config({{"retrieval", {{"k", "ten"}}}}, "/"), led::InvalidInput);
  CHECK_THROWS_AS(led::parse_config({{"generator", {{"mode", "nucleus"}}}}, "/"), led::InvalidInput);
  CHECK_THROWS_AS(led::parse_config(json::array(), "/"), led::InvalidInput);
}

TEST_CASE("fixture config loads") {
  const auto c = led::load_config(LED_FIXTURE_DIR "/config.json");
  REQUIRE(c.resources.corpus.has_value());
  CHECK(std::filesystem::exists(*c.resources.corpus));
  CHECK(std::filesystem::exists(*c.resources.bank));
  CHECK(c.router_training.epochs == 20);
  CHECK_THROWS_AS(led::load_config("/nonexistent/config.json"), led::ResourceError);
}
