#pragma once

// Independent reference implementations used to check the engine. They share
// nothing with the code under test beyond the tokenizer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "led/generator.hpp"

namespace oracle {

struct Hit {
  std::string id;
  double score;
};

/// Okapi BM25 evaluated document by document with no index.
inline std::vector<Hit> brute_force_bm25(const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
                                         const std::vector<std::string>& query, std::size_t k, double k1 = 1.2,
                                         double b = 0.75) {
  const double n = static_cast<double>(docs.size());
  double total = 0.0;
  for (const auto& d : docs) total += static_cast<double>(d.second.size());
  const double avgdl = total / n;
  const std::set<std::string> terms(query.begin(), query.end());
  std::vector<Hit> hits;
  for (const auto& [id, tokens] : docs) {
    double score = 0.0;
    for (const auto& t : terms) {
      const double tf = static_cast<double>(std::count(tokens.begin(), tokens.end(), t));
      if (tf == 0.0) continue;
      double df = 0.0;
      for (const auto& other : docs) {
        if (std::find(other.second.begin(), other.second.end(), t) != other.second.end()) df += 1.0;
      }
      const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
      const double len = static_cast<double>(tokens.size());
      score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avgdl));
    }
    if (score > 0.0) hits.push_back({id, score});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& c) {
    if (a.score != c.score) return a.score > c.score;
    return a.id < c.id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

/// Next-token distributions drawn at random per prefix, reproducible from a
/// seed. `temperature` below 1 makes them peakier.
class RandomLm final : public led::LmBackend {
 public:
  RandomLm(std::size_t vocab_size, led::TokenId eos, std::uint64_t seed, double temperature = 1.0)
      : eos_(eos), seed_(seed), temperature_(temperature) {
    for (std::size_t i = 0; i < vocab_size; ++i) vocabulary_.push_back("w" + std::to_string(i));
  }
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  led::TokenId eos() const override { return eos_; }
  std::vector<double> next_distribution(std::span<const led::TokenId> prefix) const override {
    std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ULL;
    for (auto t : prefix) h = (h ^ (t + 1)) * 0x100000001b3ULL;
    std::mt19937_64 rng(h);
    std::exponential_distribution<double> draw(1.0);
    std::vector<double> p(vocabulary_.size());
    double sum = 0.0;
    for (auto& x : p) {
      x = std::pow(draw(rng), 1.0 / temperature_);
      sum += x;
    }
    for (auto& x : p) x /= sum;
    return p;
  }

 private:
  std::vector<std::string> vocabulary_;
  led::TokenId eos_;
  std::uint64_t seed_;
  double temperature_;
};

class UniformLm final : public led::LmBackend {
 public:
  explicit UniformLm(std::size_t vocab_size, led::TokenId eos = 0) : eos_(eos) {
    for (std::size_t i = 0; i < vocab_size; ++i) vocabulary_.push_back("u" + std::to_string(i));
  }
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  led::TokenId eos() const override { return eos_; }
  std::vector<double> next_distribution(std::span<const led::TokenId>) const override {
    return std::vector<double>(vocabulary_.size(), 1.0 / static_cast<double>(vocabulary_.size()));
  }

 private:
  std::vector<std::string> vocabulary_;
  led::TokenId eos_;
};

struct Sequence {
  std::vector<led::TokenId> tokens;  // without end-of-sequence
  double log_prob = 0.0;
  bool finished = false;
};

/// Every complete output of a length-bounded decoder: continuations closed
/// by end-of-sequence within max_len steps, plus unfinished ones of exactly
/// max_len tokens. Returns the best by total log-probability, ties to the
/// lexicographically smaller token sequence.
inline Sequence exhaustive_best(const led::LmBackend& lm, const std::vector<led::TokenId>& prompt, int max_len) {
  Sequence best;
  bool have = false;
  const auto consider = [&](Sequence s) {
    if (!have || s.log_prob > best.log_prob ||
        (s.log_prob == best.log_prob && std::lexicographical_compare(s.tokens.begin(), s.tokens.end(),
                                                                     best.tokens.begin(), best.tokens.end()))) {
      best = std::move(s);
      have = true;
    }
  };
  std::vector<Sequence> frontier{Sequence{}};
  for (int step = 0; step < max_len; ++step) {
    std::vector<Sequence> next;
    for (const auto& s : frontier) {
      auto prefix = prompt;
      prefix.insert(prefix.end(), s.tokens.begin(), s.tokens.end());
      const auto p = lm.next_distribution(prefix);
      for (led::TokenId t = 0; t < p.size(); ++t) {
        if (!(p[t] > 0.0)) continue;
        Sequence child{s.tokens, s.log_prob + std::log(p[t]), false};
        if (t == lm.eos()) {
          child.finished = true;
          consider(std::move(child));
        } else {
          child.tokens.push_back(t);
          if (step + 1 == max_len) consider(std::move(child));
          else next.push_back(std::move(child));
        }
      }
    }
    frontier = std::move(next);
  }
  return best;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace oracle
