#include <doctest.h>

#include <random>

#include "led/text.hpp"

using led::tokenize;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize: empty and punctuation-only input") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("  ?! ...").empty());
}

TEST_CASE("tokenize: lowercases and drops punctuation") {
  CHECK(tokenize("Who sang Skyfall?") == Tokens{"who", "sang", "skyfall"});
  CHECK(tokenize("November 14, 2001") == Tokens{"november", "14", "2001"});
}

TEST_CASE("tokenize: apostrophes survive only inside a word") {
  CHECK(tokenize("don't stop Believin'!") == Tokens{"don't", "stop", "believin"});
  CHECK(tokenize("'quoted'") == Tokens{"quoted"});
  CHECK(tokenize("Adele\xE2\x80\x99s voice") == Tokens{"adele's", "voice"});
}

TEST_CASE("tokenize: unicode letters, case folding and NFC") {
  CHECK(tokenize("Beyonc\xC3\xA9 Amélie") == Tokens{"beyoncé", "amélie"});
  // decomposed e + combining acute composes to the same token
  CHECK(tokenize("Beyonce\xCC\x81") == tokenize("Beyonc\xC3\xA9"));
  CHECK(tokenize("\xC3\x89MILE") == Tokens{"émile"});
}

TEST_CASE("tokenize_spans: offsets slice the normalized text") {
  const std::string text = "When was it released?";
  for (const auto& s : led::tokenize_spans(text)) {
    CHECK(tokenize(text.substr(s.begin, s.end - s.begin)) == Tokens{s.token});
  }
}

TEST_CASE("tokenize is idempotent on its joined output") {
  std::mt19937 rng(11);
  const std::string alphabet = "abcXYZ019 '\xE2\x80\x99-.,!?\t\xC3\xA9";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 30);
    for (int j = 0; j < len; ++j) s.push_back(alphabet[rng() % alphabet.size()]);
    const auto once = tokenize(s);
    CHECK(tokenize(led::join_tokens(once)) == once);
  }
}

TEST_CASE("word lists") {
  CHECK(led::is_stopword("the"));
  CHECK(led::is_stopword("when"));
  CHECK_FALSE(led::is_stopword("not"));
  CHECK_FALSE(led::is_stopword("skyfall"));
  CHECK(led::is_stock_verb("like"));
  CHECK(led::is_negation("not"));
  CHECK(led::is_negation("never"));
  CHECK(led::is_negation("don't"));
  CHECK_FALSE(led::is_negation("note"));
}

TEST_CASE("content tokens and word counts") {
  CHECK(led::content_tokens(tokenize("When was the movie released")) == Tokens{"movie", "released"});
  CHECK(led::word_count("It was twenty-three words, roughly.") == 6);
  CHECK(led::trim("  x y \n") == "x y");
}
