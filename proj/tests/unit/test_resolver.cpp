#include <doctest.h>

#include <random>

#include "led/core.hpp"
#include "led/errors.hpp"
#include "led/resolver.hpp"

namespace {

led::ConversationState with_stack(std::vector<led::Entity> entities) {
  led::ConversationState state;
  state.entities = std::move(entities);
  return state;
}

led::Gazetteer media_gazetteer() {
  led::Gazetteer g;
  g.add("Skyfall", "movie");
  g.add("Skyfall", "song");
  g.add("Harry Potter", "franchise");
  g.add("Inception", "movie");
  return g;
}

std::string rewritten(const std::string& q, const led::ConversationState& s, const led::Gazetteer& g) {
  return led::rewrite(led::Utterance(q), s, g).rewritten.text();
}

}  // namespace

TEST_CASE("gazetteer lookup is case-insensitive and type-aware") {
  const auto g = media_gazetteer();
  CHECK(g.lookup("SKYFALL") == "movie");
  CHECK(g.lookup("skyfall", {"the", "skyfall", "song"}) == "song");
  CHECK(g.lookup("harry  potter") == "franchise");
  CHECK_FALSE(g.lookup("Titanic").has_value());
}

TEST_CASE("gazetteer file loads and reports malformed lines") {
  const auto g = led::Gazetteer::load(LED_FIXTURE_DIR "/gazetteer.tsv");
  CHECK(g.lookup("abbey road") == "album");
  CHECK_THROWS_AS(led::Gazetteer::load("/nonexistent/gazetteer.tsv"), led::ResourceError);
}

TEST_CASE("extract_entities: capitalized runs, quotes and gazetteer") {
  const led::Gazetteer empty;
  auto e = led::extract_entities("I love the Harry Potter movies", empty);
  REQUIRE(e.size() == 1);
  CHECK(e[0].surface == "Harry Potter");
  CHECK_FALSE(e[0].entity_type.has_value());
  CHECK(e[0].salience == 1.0);

  const auto g = media_gazetteer();
  e = led::extract_entities("I love the Harry Potter movies", g);
  REQUIRE(e.size() == 1);
  CHECK(e[0].entity_type == "franchise");

  CHECK(led::extract_entities("tell me a joke", empty).empty());

  led::Gazetteer songs;
  songs.add("skyfall", "song");
  e = led::extract_entities("Who sang \"Skyfall\"?", songs);
  REQUIRE(e.size() == 1);
  CHECK(e[0].surface == "Skyfall");
  CHECK(e[0].entity_type == "song");
}

TEST_CASE("extract_entities: sentence-initial verbs and lowercase gazetteer hits") {
  const auto g = media_gazetteer();
  CHECK(led::extract_entities("Tell me a joke", g).empty());
  auto e = led::extract_entities("have you seen inception", g);
  REQUIRE(e.size() == 1);
  CHECK(e[0].surface == "inception");
  CHECK(e[0].entity_type == "movie");
  e = led::extract_entities("When was the movie Skyfall released?", g);
  REQUIRE(e.size() == 1);
  CHECK(e[0].entity_type == "movie");
}

TEST_CASE("decay_and_merge: decay, re-mention, ordering") {
  const led::Entity a{"A", std::nullopt, 1, 1.0};
  const led::Entity b{"B", std::nullopt, 2, 1.0};

  auto s = led::decay_and_merge({a}, {}, 0.5);
  REQUIRE(s.size() == 1);
  CHECK(s[0].salience == 0.5);

  s = led::decay_and_merge({led::Entity{"A", std::nullopt, 1, 0.5}}, {a}, 0.5);
  REQUIRE(s.size() == 1);
  CHECK(s[0].salience == 1.0);

  s = led::decay_and_merge({a}, {b}, 0.5);
  REQUIRE(s.size() == 2);
  CHECK(s[0].surface == "B");
  CHECK(s[0].salience == 1.0);
  CHECK(s[1].surface == "A");
  CHECK(s[1].salience == 0.5);
}

TEST_CASE("decay_and_merge: ties break by recency then surface; no duplicates") {
  const led::Entity older{"Zed", std::nullopt, 1, 0.5};
  const led::Entity newer{"Amy", std::nullopt, 3, 0.5};
  const led::Entity same_turn{"Bob", std::nullopt, 3, 0.5};
  auto s = led::decay_and_merge({older, newer, same_turn}, {}, 1.0);
  CHECK(s[0].surface == "Amy");
  CHECK(s[1].surface == "Bob");
  CHECK(s[2].surface == "Zed");

  s = led::decay_and_merge({}, {older, older}, 0.5);
  CHECK(s.size() == 1);
}

TEST_CASE("salience strictly decreases without re-mention") {
  std::vector<led::Entity> stack{{"A", "movie", 1, 1.0}, {"B", std::nullopt, 1, 0.75}};
  for (int i = 0; i < 20; ++i) {
    const auto next = led::decay_and_merge(stack, {}, 0.5);
    for (std::size_t j = 0; j < next.size(); ++j) CHECK(next[j].salience < stack[j].salience);
    stack = next;
  }
}

TEST_CASE("rewrite: pronoun substitution renders the typed entity") {
  const auto g = media_gazetteer();
  const auto state = with_stack({{"Skyfall", "song", 1, 1.0}});
  const auto r = led::rewrite(led::Utterance("When was it released?"), state, g);
  CHECK(r.rewritten.text() == "When was the Skyfall song released?");
  CHECK(r.backend == led::RewriteBackend::Baseline);
  REQUIRE(r.substitutions.size() == 1);
  CHECK(r.substitutions[0].surface == "Skyfall");
  CHECK(r.substitutions[0].entity_type == "song");
}

TEST_CASE("rewrite: untyped entities render bare; possessives and 'that one'") {
  const led::Gazetteer g;
  const auto state = with_stack({{"Queen", std::nullopt, 1, 1.0}});
  CHECK(rewritten("Do you like them?", state, g) == "Do you like Queen?");
  CHECK(rewritten("What is their best album?", state, g) == "What is Queen's best album?");
  CHECK(rewritten("I like that one", state, g) == "I like Queen");
  CHECK(rewritten("It rocks", state, g) == "Queen rocks");
}

TEST_CASE("rewrite: ellipsis completion") {
  const auto g = media_gazetteer();
  const auto state = with_stack({{"Harry Potter", "franchise", 1, 1.0}});
  CHECK(rewritten("And the novel?", state, g) == "And the novel of the Harry Potter franchise?");
  // a verb or a longer query is not elliptical
  CHECK(rewritten("Do you sing?", state, g) == "Do you sing?");
  CHECK(rewritten("And what about the novel then", state, g) == "And what about the novel then");
  // greetings are not ellipses
  CHECK(rewritten("Thanks!", state, g) == "Thanks!");
}

TEST_CASE("rewrite: identity when the query is self-contained or the stack is empty") {
  const auto g = media_gazetteer();
  const auto state = with_stack({{"Skyfall", "song", 1, 1.0}});
  const auto r = led::rewrite(led::Utterance("Who directed Inception?"), state, g);
  CHECK(r.rewritten.text() == "Who directed Inception?");
  CHECK(r.substitutions.empty());
  CHECK(rewritten("When was it released?", led::ConversationState{}, g) == "When was it released?");
}

TEST_CASE("rewrite properties over random stacks") {
  const auto g = media_gazetteer();
  const std::vector<std::string> queries = {"When was it released?", "Do you like it?", "And the novel?",
                                            "Who directed Inception?", "Is that one good?", "tell me more",
                                            "What about their tour?", "Hi"};
  const std::vector<std::string> surfaces = {"Skyfall", "Harry Potter", "Queen", "Adele"};
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::vector<led::Entity> stack;
    const int n = static_cast<int>(rng() % 4);
    for (int j = 0; j < n; ++j) {
      std::optional<std::string> type;
      if (rng() % 2) type = "movie";
      stack.push_back({surfaces[rng() % surfaces.size()], type, static_cast<int>(rng() % 5), 1.0 / (1 + rng() % 4)});
    }
    stack = led::decay_and_merge(stack, {}, 1.0);
    const auto state = with_stack(stack);
    const led::Utterance q(queries[rng() % queries.size()]);
    const auto a = led::rewrite(q, state, g);
    const auto b = led::rewrite(q, state, g);
    CHECK(a.rewritten == b.rewritten);  // determinism
    if (a.substitutions.empty()) CHECK(a.rewritten.text() == q.text());
    for (const auto& s : a.substitutions) {
      const bool known = std::any_of(stack.begin(), stack.end(), [&](const led::Entity& e) {
        return e.surface == s.surface && e.entity_type == s.entity_type;
      });
      CHECK(known);
    }
    if (!led::extract_entities(q.text(), g).empty()) CHECK(a.rewritten.text() == q.text());
  }
}
