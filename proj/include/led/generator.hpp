#pragma once

// Subjective response generation: the language-model backend contract, beam
// and top-k decoders over it, and the retrieval-based response bank used when
// no neural backend is configured.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "led/core.hpp"

namespace led {

using TokenId = std::uint32_t;

/// Next-token distribution source. Implementations must return a vector of
/// vocabulary size whose entries are non-negative and sum to 1.
class LmBackend {
 public:
  virtual ~LmBackend() = default;
  virtual const std::vector<std::string>& vocabulary() const = 0;
  virtual TokenId eos() const = 0;
  virtual std::vector<double> next_distribution(std::span<const TokenId> prefix) const = 0;
};

enum class DecodeMode { Beam, TopK };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::Beam;
  int beam_width = 4;
  int k = 10;
  int max_len = 32;  // generated tokens, end-of-sequence included
  std::uint64_t seed = 0;
  bool length_normalize = false;  // rank finished hypotheses by mean log-prob
};

struct Decoded {
  std::vector<TokenId> tokens;  // continuation without the end-of-sequence token
  double log_prob = 0.0;        // includes the end-of-sequence step when one was emitted
  bool finished = false;        // ended with end-of-sequence rather than max_len

  friend bool operator==(const Decoded&, const Decoded&) = default;
};

/// Argmax at every step; ties go to the smaller token id.
Decoded greedy_decode(const LmBackend& backend, std::span<const TokenId> prompt, int max_len);

/// Length-bounded beam search maximizing total log-probability. Hypotheses
/// end on end-of-sequence or at max_len; the best ended hypothesis wins, ties
/// broken by the lexicographically smaller token sequence.
Decoded beam_decode(const LmBackend& backend, std::span<const TokenId> prompt, const DecodeConfig& config);

/// Samples from the renormalized k most probable tokens at each step using a
/// seeded stream.
Decoded topk_decode(const LmBackend& backend, std::span<const TokenId> prompt, const DecodeConfig& config);

/// Sum of log p(token_i | prompt, tokens_<i). Throws ZeroProbabilityError.
double sequence_logprob(const LmBackend& backend, std::span<const TokenId> tokens,
                        std::span<const TokenId> prompt = {});

/// Indices of the k most probable entries, most probable first, ties by index.
std::vector<TokenId> top_k_indices(const std::vector<double>& probs, std::size_t k);

/// Maps tokens onto vocabulary ids, dropping unknown tokens.
std::vector<TokenId> encode_tokens(const LmBackend& backend, const std::vector<std::string>& tokens);
std::string decode_tokens(const LmBackend& backend, std::span<const TokenId> ids);

struct BankEntry {
  std::string context;
  std::string response;

  friend bool operator==(const BankEntry&, const BankEntry&) = default;
};

/// Context/response pairs matched by tf-idf cosine similarity with
/// ln(1+tf) * ln(N/df) term weights.
class ResponseBank {
 public:
  ResponseBank() = default;
  explicit ResponseBank(std::vector<BankEntry> entries);

  /// JSONL `{"context": ..., "response": ...}`.
  static ResponseBank load(const std::filesystem::path& path);

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<BankEntry>& entries() const noexcept { return entries_; }

  /// Top-n responses by cosine similarity, ties by bank order.
  std::vector<Candidate> query(const Utterance& query, std::size_t n) const;

  double similarity(const Utterance& query, std::size_t entry) const;

 private:
  using SparseVector = std::vector<std::pair<std::size_t, double>>;  // sorted by term id
  SparseVector vectorize(const std::vector<std::string>& tokens) const;

  std::vector<BankEntry> entries_;
  std::map<std::string, std::size_t> term_ids_;
  std::vector<double> idf_;
  std::vector<SparseVector> vectors_;
};

/// Remote or local source of complete candidate responses.
class CandidateBackend {
 public:
  virtual ~CandidateBackend() = default;
  virtual std::vector<Candidate> generate(const std::vector<ContextPair>& context, const std::string& query,
                                          std::size_t n) = 0;
};

struct GeneratorResources {
  const ResponseBank* bank = nullptr;
  const LmBackend* lm = nullptr;
  DecodeConfig decode;
  CandidateBackend* remote = nullptr;
};

inline constexpr std::size_t kDefaultCandidateCount = 3;

/// Candidate responses for the rewritten query, best first. Prefers the
/// remote backend, then the language model, then the response bank.
/// Throws InvalidInput when no source is available.
std::vector<Candidate> generate_candidates(const ConversationState& state, const Utterance& rewritten,
                                           std::size_t n, const GeneratorResources& resources);

/// Candidates from the language model alone: one beam result, or n top-k
/// samples with seeds seed, seed+1, ...
std::vector<Candidate> decode_candidates(const LmBackend& backend, const Utterance& rewritten, std::size_t n,
                                         const DecodeConfig& config);

}  // namespace led
