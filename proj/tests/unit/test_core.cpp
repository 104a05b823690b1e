#include <doctest.h>

#include "led/core.hpp"
#include "led/errors.hpp"
#include "led/resolver.hpp"

namespace {

led::Turn make_turn(const std::string& user, const std::string& response) {
  led::Turn t;
  t.user = led::Utterance(user);
  t.rewritten = t.user;
  t.response = response;
  return t;
}

}  // namespace

TEST_CASE("Utterance keeps normalized text and derived tokens") {
  const led::Utterance u("Who sang Skyfall?");
  CHECK(u.text() == "Who sang Skyfall?");
  CHECK(u.tokens() == std::vector<std::string>{"who", "sang", "skyfall"});
  CHECK_THROWS_AS(led::Utterance("   "), led::InvalidInput);
}

TEST_CASE("append_turn grows the history in order") {
  const led::Gazetteer gaz;
  led::ConversationState state;
  led::append_turn(state, make_turn("hi", "hello"), gaz);
  CHECK(state.turns.size() == 1);

  for (int i = 2; i <= 9; ++i) led::append_turn(state, make_turn("q" + std::to_string(i), "r"), gaz);
  led::append_turn(state, make_turn("last", "r"), gaz);
  REQUIRE(state.turns.size() == 10);
  CHECK(state.turns.front().user.text() == "hi");
  CHECK(state.turns.back().user.text() == "last");
}

TEST_CASE("append_turn does not deduplicate") {
  const led::Gazetteer gaz;
  led::ConversationState state;
  const auto t = make_turn("Do you like Queen?", "yes");
  led::append_turn(state, t, gaz);
  led::append_turn(state, t, gaz);
  CHECK(state.turns.size() == 2);
}

TEST_CASE("append_turn rejects an incomplete turn") {
  const led::Gazetteer gaz;
  led::ConversationState state;
  CHECK_THROWS_AS(led::append_turn(state, make_turn("hi", "  "), gaz), led::InvalidInput);
  CHECK(state.turns.empty());
}

TEST_CASE("append_turn refreshes the entity stack from the rewritten query") {
  led::Gazetteer gaz;
  gaz.add("skyfall", "movie");
  led::ConversationState state;
  led::append_turn(state, make_turn("When was the movie Skyfall released?", "In 2012."), gaz);
  REQUIRE(state.entities.size() == 1);
  CHECK(state.entities[0].surface == "Skyfall");
  CHECK(state.entities[0].entity_type == "movie");
  CHECK(state.entities[0].last_turn == 1);
  led::append_turn(state, make_turn("hello", "hi"), gaz);
  CHECK(state.entities[0].salience == doctest::Approx(0.5));
}

TEST_CASE("context_window returns the last n pairs oldest first") {
  const led::Gazetteer gaz;
  led::ConversationState state;
  CHECK(led::context_window(state, 3).empty());
  for (int i = 1; i <= 5; ++i) led::append_turn(state, make_turn("u" + std::to_string(i), "r" + std::to_string(i)), gaz);
  const auto w = led::context_window(state, 3);
  REQUIRE(w.size() == 3);
  CHECK(w[0].user == "u3");
  CHECK(w[2].user == "u5");
  CHECK(w[2].response == "r5");

  led::ConversationState two;
  led::append_turn(two, make_turn("a", "b"), gaz);
  led::append_turn(two, make_turn("c", "d"), gaz);
  const auto all = led::context_window(two, 10);
  REQUIRE(all.size() == 2);
  CHECK(all[0].user == "a");
}

TEST_CASE("route and verdict names round-trip") {
  for (auto r : {led::Route::Factual, led::Route::Subjective}) CHECK(led::route_from_string(led::to_string(r)) == r);
  for (auto v : {led::Verdict::Pass, led::Verdict::Inconsistent, led::Verdict::Toxic}) {
    CHECK(led::verdict_from_string(led::to_string(v)) == v);
  }
  CHECK_THROWS_AS(led::route_from_string("maybe"), led::InvalidInput);
}
