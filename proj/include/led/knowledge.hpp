#pragma once

// Factual answering: BM25 passage retrieval over an inverted index, answer
// sentence extraction, score fusion and template paraphrasing.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "led/core.hpp"

namespace led {

struct Passage {
  std::string id;
  std::string url;
  std::string text;
  std::vector<std::string> tokens;

  static Passage make(std::string id, std::string url, std::string text);

  friend bool operator==(const Passage&, const Passage&) = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
  std::uint32_t passage = 0;  // ordinal into passages()
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct ScoredPassage {
  std::string passage_id;
  double bm25 = 0.0;
  std::uint32_t ordinal = 0;

  friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

/// Inverted index with BM25 statistics. Immutable once built.
class PassageIndex {
 public:
  /// Throws InvalidInput on an empty corpus or a duplicate passage id.
  static PassageIndex build(std::vector<Passage> passages, Bm25Params params = {});

  const std::vector<Passage>& passages() const noexcept { return passages_; }
  const std::map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }
  const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
  std::size_t size() const noexcept { return passages_.size(); }
  double avgdl() const noexcept { return avgdl_; }
  const Bm25Params& params() const noexcept { return params_; }

  std::size_t document_frequency(const std::string& term) const;
  double idf(const std::string& term) const;
  const Passage* find(std::string_view id) const;

  /// Top-K passages by Okapi BM25 over the distinct query tokens; zero
  /// scores are omitted; ties go to the smaller passage id.
  std::vector<ScoredPassage> search(const std::vector<std::string>& query_tokens, std::size_t k) const;

  // Versioned binary form; identical corpus and params give identical bytes.
  std::vector<std::uint8_t> encode() const;
  static PassageIndex decode(const std::vector<std::uint8_t>& bytes);
  void save(const std::filesystem::path& path) const;
  static PassageIndex load(const std::filesystem::path& path);

 private:
  std::vector<Passage> passages_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_lengths_;
  double avgdl_ = 0.0;
  Bm25Params params_;
};

std::vector<ScoredPassage> bm25_search(const PassageIndex& index, const Utterance& query, std::size_t k);

/// BM25 term idf with +1 smoothing: ln((N - df + 0.5) / (df + 0.5) + 1).
double bm25_idf(std::size_t n_docs, std::size_t df);

/// One term's BM25 contribution.
double bm25_term(double idf, double tf, double doc_len, double avgdl, const Bm25Params& params);

/// JSONL corpus, one `{"id", "url", "text"}` record per line.
std::vector<Passage> load_corpus(const std::filesystem::path& path);

struct SentenceSpan {
  std::size_t start = 0;  // byte offsets into the passage text
  std::size_t end = 0;
};

/// Sentences end at . ? ! followed by whitespace and an uppercase letter.
std::vector<SentenceSpan> split_sentences(std::string_view text);

struct ExtractedSpan {
  SentenceSpan span;
  std::string text;
  double score = 0.0;
};

/// Best sentence by the fraction of distinct query content tokens it
/// contains; earliest sentence wins ties.
ExtractedSpan extract_span(const Passage& passage, const Utterance& query);

inline constexpr double kDefaultFusionAlpha = 0.5;
inline constexpr std::size_t kDefaultTopK = 10;

struct FusedScore {
  double bm25_norm = 0.0;
  double fused = 0.0;
};

/// fused = alpha * bm25/bm25_max + (1 - alpha) * span_score. A non-positive
/// bm25_max makes bm25_norm 0.
FusedScore fuse_scores(double bm25, double bm25_max, double span_score, double alpha);

struct FactualAnswer {
  std::vector<ScoredPassage> retrieved;
  std::optional<ScoredSpan> best;  // empty: no passage matched
};

using SpanExtractor = std::function<ExtractedSpan(const Passage&, const Utterance&)>;

/// Retrieve top-K, extract a span per passage, fuse and keep the best. An
/// empty `extractor` means the sentence-overlap baseline.
FactualAnswer answer_factual(const PassageIndex& index, const Utterance& query, std::size_t k = kDefaultTopK,
                             double alpha = kDefaultFusionAlpha, const SpanExtractor& extractor = {});

inline constexpr std::size_t kMaxResponseWords = 30;

/// Turns an answer span into a conversational sentence of at most 30 words.
std::string paraphrase(std::string_view span_text, const Utterance& rewritten_query);

/// Cuts text to at most `max_words` tokenizer words and ends it with a
/// terminal punctuation mark.
std::string cap_words(std::string_view text, std::size_t max_words = kMaxResponseWords);

}  // namespace led
