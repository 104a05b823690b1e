#include "led/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jsonl.hpp"
#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

struct Hypothesis {
  std::vector<TokenId> tokens;
  double score = 0.0;
};

bool lexicographically_less(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void check_backend(const LmBackend& backend) {
  if (backend.vocabulary().empty()) throw InvalidInput("language model vocabulary is empty");
  if (backend.eos() >= backend.vocabulary().size()) throw InvalidInput("end-of-sequence id outside vocabulary");
}

std::vector<double> distribution(const LmBackend& backend, const std::vector<TokenId>& prefix) {
  auto probs = backend.next_distribution(prefix);
  if (probs.size() != backend.vocabulary().size()) {
    throw BackendError("distribution size does not match vocabulary");
  }
  return probs;
}

std::vector<TokenId> concat(std::span<const TokenId> a, const std::vector<TokenId>& b) {
  std::vector<TokenId> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double ranking_score(const Decoded& d, bool length_normalize) {
  if (!length_normalize) return d.log_prob;
  const auto steps = d.tokens.size() + (d.finished ? 1 : 0);
  return steps == 0 ? d.log_prob : d.log_prob / static_cast<double>(steps);
}

}  // namespace

std::vector<TokenId> top_k_indices(const std::vector<double>& probs, std::size_t k) {
  std::vector<TokenId> ids(probs.size());
  std::iota(ids.begin(), ids.end(), TokenId{0});
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(), [&](TokenId a, TokenId b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  ids.resize(k);
  return ids;
}

Decoded greedy_decode(const LmBackend& backend, std::span<const TokenId> prompt, int max_len) {
  check_backend(backend);
  if (max_len < 1) throw InvalidInput("max_len must be at least 1");
  Decoded out;
  std::vector<TokenId> prefix(prompt.begin(), prompt.end());
  for (int step = 0; step < max_len; ++step) {
    const auto probs = distribution(backend, prefix);
    const TokenId best = top_k_indices(probs, 1).front();
    if (!(probs[best] > 0.0)) break;
    out.log_prob += std::log(probs[best]);
    if (best == backend.eos()) {
      out.finished = true;
      break;
    }
    out.tokens.push_back(best);
    prefix.push_back(best);
  }
  return out;
}

Decoded beam_decode(const LmBackend& backend, std::span<const TokenId> prompt, const DecodeConfig& config) {
  check_backend(backend);
  if (config.beam_width < 1) throw InvalidInput("beam_width must be at least 1");
  if (config.max_len < 1) throw InvalidInput("max_len must be at least 1");
  const auto width = static_cast<std::size_t>(config.beam_width);
  const TokenId eos = backend.eos();

  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Decoded> ended;
  for (int step = 0; step < config.max_len && !live.empty(); ++step) {
    std::vector<Hypothesis> expansions;
    for (const auto& h : live) {
      const auto probs = distribution(backend, concat(prompt, h.tokens));
      // Only a parent's top-`width` children can survive the global cut.
      for (TokenId t : top_k_indices(probs, width)) {
        if (!(probs[t] > 0.0)) continue;
        Hypothesis child{h.tokens, h.score + std::log(probs[t])};
        child.tokens.push_back(t);
        expansions.push_back(std::move(child));
      }
    }
    const auto keep = std::min(width, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                      [](const Hypothesis& a, const Hypothesis& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return lexicographically_less(a.tokens, b.tokens);
                      });
    expansions.resize(keep);

    live.clear();
    const bool last_step = step + 1 == config.max_len;
    for (auto& h : expansions) {
      if (h.tokens.back() == eos) {
        h.tokens.pop_back();
        ended.push_back({std::move(h.tokens), h.score, true});
      } else if (last_step) {
        ended.push_back({std::move(h.tokens), h.score, false});
      } else {
        live.push_back(std::move(h));
      }
    }
  }
  if (ended.empty()) return Decoded{};

  const auto better = [&](const Decoded& a, const Decoded& b) {
    const double sa = ranking_score(a, config.length_normalize);
    const double sb = ranking_score(b, config.length_normalize);
    if (sa != sb) return sa > sb;
    return lexicographically_less(a.tokens, b.tokens);
  };
  return *std::min_element(ended.begin(), ended.end(), better);
}

Decoded topk_decode(const LmBackend& backend, std::span<const TokenId> prompt, const DecodeConfig& config) {
  check_backend(backend);
  const auto vocab_size = backend.vocabulary().size();
  if (config.k < 1 || static_cast<std::size_t>(config.k) > vocab_size) {
    throw InvalidInput("k must lie in [1, vocabulary size]");
  }
  if (config.max_len < 1) throw InvalidInput("max_len must be at least 1");
  std::mt19937_64 rng(config.seed);
  Decoded out;
  std::vector<TokenId> prefix(prompt.begin(), prompt.end());
  for (int step = 0; step < config.max_len; ++step) {
    const auto probs = distribution(backend, prefix);
    const auto top = top_k_indices(probs, static_cast<std::size_t>(config.k));
    double mass = 0.0;
    for (auto t : top) mass += probs[t];
    if (!(mass > 0.0)) break;
    const double u = unit_interval(rng) * mass;
    TokenId chosen = top.front();
    double cumulative = 0.0;
    for (auto t : top) {
      if (!(probs[t] > 0.0)) continue;
      chosen = t;
      cumulative += probs[t];
      if (u < cumulative) break;
    }
    out.log_prob += std::log(probs[chosen]);
    if (chosen == backend.eos()) {
      out.finished = true;
      break;
    }
    out.tokens.push_back(chosen);
    prefix.push_back(chosen);
  }
  return out;
}

double sequence_logprob(const LmBackend& backend, std::span<const TokenId> tokens, std::span<const TokenId> prompt) {
  check_backend(backend);
  std::vector<TokenId> prefix(prompt.begin(), prompt.end());
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= backend.vocabulary().size()) throw InvalidInput("token id outside vocabulary");
    const auto probs = distribution(backend, prefix);
    const double p = probs[tokens[i]];
    if (!(p > 0.0)) throw ZeroProbabilityError(i);
    total += std::log(p);
    prefix.push_back(tokens[i]);
  }
  return total;
}

std::vector<TokenId> encode_tokens(const LmBackend& backend, const std::vector<std::string>& tokens) {
  const auto& vocab = backend.vocabulary();
  std::vector<TokenId> ids;
  for (const auto& t : tokens) {
    const auto it = std::find(vocab.begin(), vocab.end(), t);
    if (it != vocab.end()) ids.push_back(static_cast<TokenId>(it - vocab.begin()));
  }
  return ids;
}

std::string decode_tokens(const LmBackend& backend, std::span<const TokenId> ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += backend.vocabulary().at(id);
  }
  return out;
}

ResponseBank::ResponseBank(std::vector<BankEntry> entries) : entries_(std::move(entries)) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::size_t> df;
  for (const auto& e : entries_) {
    auto tokens = tokenize(e.context);
    std::vector<std::string> unique = tokens;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (const auto& t : unique) {
      const auto [it, inserted] = term_ids_.emplace(t, term_ids_.size());
      if (inserted) df.push_back(0);
      ++df[it->second];
    }
    docs.push_back(std::move(tokens));
  }
  const double n = static_cast<double>(entries_.size());
  idf_.resize(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) idf_[i] = std::log(n / static_cast<double>(df[i]));
  for (const auto& d : docs) vectors_.push_back(vectorize(d));
}

ResponseBank ResponseBank::load(const std::filesystem::path& path) {
  std::vector<BankEntry> entries;
  detail::for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t) {
    entries.push_back({detail::required_string(rec, "context"), detail::required_string(rec, "response")});
    if (trim(entries.back().response).empty()) throw InvalidInput("empty response");
  });
  return ResponseBank(std::move(entries));
}

ResponseBank::SparseVector ResponseBank::vectorize(const std::vector<std::string>& tokens) const {
  std::map<std::size_t, double> tf;
  for (const auto& t : tokens) {
    const auto it = term_ids_.find(t);
    if (it != term_ids_.end()) tf[it->second] += 1.0;
  }
  SparseVector v;
  for (const auto& [id, count] : tf) {
    const double w = std::log(1.0 + count) * idf_[id];
    if (w != 0.0) v.emplace_back(id, w);
  }
  return v;
}

double ResponseBank::similarity(const Utterance& query, std::size_t entry) const {
  const auto q = vectorize(query.tokens());
  const auto& c = vectors_.at(entry);
  double dot = 0.0, qq = 0.0, cc = 0.0;
  for (const auto& [_, w] : q) qq += w * w;
  for (const auto& [_, w] : c) cc += w * w;
  std::size_t i = 0, j = 0;
  while (i < q.size() && j < c.size()) {
    if (q[i].first == c[j].first) dot += q[i++].second * c[j++].second;
    else if (q[i].first < c[j].first) ++i;
    else ++j;
  }
  if (qq == 0.0 || cc == 0.0) return 0.0;
  return dot / (std::sqrt(qq) * std::sqrt(cc));
}

std::vector<Candidate> ResponseBank::query(const Utterance& query, std::size_t n) const {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.push_back({entries_[i].response, similarity(query, i), {}, {}});
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.gen_score > b.gen_score; });
  if (out.size() > n) out.resize(n);
  return out;
}

std::vector<Candidate> decode_candidates(const LmBackend& backend, const Utterance& rewritten, std::size_t n,
                                         const DecodeConfig& config) {
  const auto prompt = encode_tokens(backend, rewritten.tokens());
  std::vector<Candidate> out;
  if (config.mode == DecodeMode::Beam) {
    const auto d = beam_decode(backend, prompt, config);
    out.push_back({decode_tokens(backend, d.tokens), d.log_prob, {}, {}});
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto c = config;
      c.seed = config.seed + i;
      const auto d = topk_decode(backend, prompt, c);
      out.push_back({decode_tokens(backend, d.tokens), d.log_prob, {}, {}});
    }
  }
  std::erase_if(out, [](const Candidate& c) { return trim(c.text).empty(); });
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.gen_score > b.gen_score; });
  return out;
}

std::vector<Candidate> generate_candidates(const ConversationState& state, const Utterance& rewritten, std::size_t n,
                                           const GeneratorResources& resources) {
  if (n == 0) throw InvalidInput("candidate count must be positive");
  if (resources.remote) {
    auto out = resources.remote->generate(context_window(state, state.max_context), rewritten.text(), n);
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.gen_score > b.gen_score; });
    if (out.size() > n) out.resize(n);
    return out;
  }
  if (resources.lm) return decode_candidates(*resources.lm, rewritten, n, resources.decode);
  if (resources.bank && !resources.bank->empty()) return resources.bank->query(rewritten, n);
  throw InvalidInput("no response source: the response bank is empty and no backend is configured");
}

}  // namespace led
