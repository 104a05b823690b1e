#include "led/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "byteio.hpp"
#include "jsonl.hpp"
#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

constexpr std::string_view kIndexMagic = "LEDI";
constexpr std::uint32_t kIndexVersion = 1;

bool ranks_before(const ScoredPassage& a, const ScoredPassage& b) {
  if (a.bm25 != b.bm25) return a.bm25 > b.bm25;
  return a.passage_id < b.passage_id;
}

std::vector<std::string> distinct(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& t : tokens) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

bool is_terminal(char c) { return c == '.' || c == '?' || c == '!'; }

bool ends_with_terminal(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == ')')) s.remove_suffix(1);
  return !s.empty() && is_terminal(s.back());
}

std::string with_terminal(std::string_view s) {
  std::string out(trim(s));
  if (out.empty()) return out;
  if (!ends_with_terminal(out)) {
    while (!out.empty() && (out.back() == ',' || out.back() == ';' || out.back() == ':' || out.back() == '-')) {
      out.pop_back();
    }
    out.push_back('.');
  }
  return out;
}

const std::regex& date_pattern() {
  static const std::regex re(
      R"((?:(?:January|February|March|April|May|June|July|August|September|October|November|December)\s+\d{1,2},\s+\d{4})|)"
      R"((?:\d{1,2}\s+(?:January|February|March|April|May|June|July|August|September|October|November|December)\s+\d{4})|)"
      R"((?:(?:January|February|March|April|May|June|July|August|September|October|November|December)\s+\d{4})|)"
      R"((?:\b(?:1[5-9]\d{2}|20\d{2})\b))");
  return re;
}

bool is_short_answer(std::string_view span) {
  return !ends_with_terminal(span) && word_count(span) <= 8;
}

}  // namespace

Passage Passage::make(std::string id, std::string url, std::string text) {
  Passage p{std::move(id), std::move(url), normalize_nfc(text), {}};
  p.tokens = tokenize(p.text);
  return p;
}

double bm25_idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

double bm25_term(double idf, double tf, double doc_len, double avgdl, const Bm25Params& params) {
  const double norm = params.k1 * (1.0 - params.b + params.b * doc_len / avgdl);
  return idf * tf * (params.k1 + 1.0) / (tf + norm);
}

PassageIndex PassageIndex::build(std::vector<Passage> passages, Bm25Params params) {
  if (passages.empty()) throw InvalidInput("cannot index an empty corpus");
  std::set<std::string> ids;
  for (const auto& p : passages) {
    if (!ids.insert(p.id).second) throw InvalidInput("duplicate passage id: " + p.id);
  }
  PassageIndex index;
  index.params_ = params;
  index.passages_ = std::move(passages);
  double total = 0.0;
  for (std::uint32_t ord = 0; ord < index.passages_.size(); ++ord) {
    auto& p = index.passages_[ord];
    if (p.tokens.empty() && !p.text.empty()) p.tokens = tokenize(p.text);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(p.tokens.size()));
    total += static_cast<double>(p.tokens.size());
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : p.tokens) ++tf[t];
    for (const auto& [term, count] : tf) index.postings_[term].push_back({ord, count});
  }
  index.avgdl_ = total / static_cast<double>(index.passages_.size());
  return index;
}

std::size_t PassageIndex::document_frequency(const std::string& term) const {
  const auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double PassageIndex::idf(const std::string& term) const { return bm25_idf(size(), document_frequency(term)); }

const Passage* PassageIndex::find(std::string_view id) const {
  for (const auto& p : passages_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::vector<ScoredPassage> PassageIndex::search(const std::vector<std::string>& query_tokens, std::size_t k) const {
  if (k == 0) throw InvalidInput("K must be at least 1");
  std::vector<double> scores(passages_.size(), 0.0);
  std::vector<bool> touched(passages_.size(), false);
  for (const auto& term : distinct(query_tokens)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double term_idf = bm25_idf(size(), it->second.size());
    for (const auto& posting : it->second) {
      scores[posting.passage] +=
          bm25_term(term_idf, posting.tf, doc_lengths_[posting.passage], avgdl_, params_);
      touched[posting.passage] = true;
    }
  }
  std::vector<ScoredPassage> hits;
  for (std::uint32_t ord = 0; ord < scores.size(); ++ord) {
    if (touched[ord] && scores[ord] > 0.0) hits.push_back({passages_[ord].id, scores[ord], ord});
  }
  const auto keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
  hits.resize(keep);
  return hits;
}

std::vector<std::uint8_t> PassageIndex::encode() const {
  detail::ByteWriter w;
  w.bytes(kIndexMagic);
  w.uint<std::uint32_t>(kIndexVersion);
  w.f64(params_.k1);
  w.f64(params_.b);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(passages_.size()));
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    w.str(passages_[i].id);
    w.str(passages_[i].url);
    w.str(passages_[i].text);
    w.uint<std::uint32_t>(doc_lengths_[i]);
  }
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(postings_.size()));
  for (const auto& [term, list] : postings_) {
    w.str(term);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      w.uint<std::uint32_t>(p.passage);
      w.uint<std::uint32_t>(p.tf);
    }
  }
  return w.take();
}

PassageIndex PassageIndex::decode(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "passage index");
  r.expect(kIndexMagic);
  const auto version = r.uint<std::uint32_t>();
  if (version != kIndexVersion) throw InvalidInput("passage index: unsupported version " + std::to_string(version));
  PassageIndex index;
  index.params_.k1 = r.f64();
  index.params_.b = r.f64();
  const auto n = r.uint<std::uint32_t>();
  if (n == 0) throw InvalidInput("passage index: empty corpus");
  double total = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto id = r.str();
    auto url = r.str();
    auto text = r.str();
    index.passages_.push_back(Passage::make(std::move(id), std::move(url), std::move(text)));
    index.doc_lengths_.push_back(r.uint<std::uint32_t>());
    if (index.doc_lengths_.back() != index.passages_.back().tokens.size()) {
      throw InvalidInput("passage index: length mismatch for " + index.passages_.back().id);
    }
    total += index.doc_lengths_.back();
  }
  index.avgdl_ = total / n;
  const auto terms = r.uint<std::uint32_t>();
  for (std::uint32_t t = 0; t < terms; ++t) {
    auto term = r.str();
    const auto count = r.uint<std::uint32_t>();
    std::vector<Posting> list(count);
    for (auto& p : list) {
      p.passage = r.uint<std::uint32_t>();
      p.tf = r.uint<std::uint32_t>();
      if (p.passage >= n) throw InvalidInput("passage index: posting out of range");
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  if (!r.done()) throw InvalidInput("passage index: trailing bytes");
  return index;
}

void PassageIndex::save(const std::filesystem::path& path) const { detail::write_file_bytes(path, encode()); }

PassageIndex PassageIndex::load(const std::filesystem::path& path) { return decode(detail::read_file_bytes(path)); }

std::vector<ScoredPassage> bm25_search(const PassageIndex& index, const Utterance& query, std::size_t k) {
  return index.search(query.tokens(), k);
}

std::vector<Passage> load_corpus(const std::filesystem::path& path) {
  std::vector<Passage> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t) {
    auto id = detail::required_string(rec, "id");
    auto text = detail::required_string(rec, "text");
    std::string url = rec.contains("url") && rec["url"].is_string() ? rec["url"].get<std::string>() : "";
    out.push_back(Passage::make(std::move(id), std::move(url), std::move(text)));
  });
  return out;
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  const auto push = [&](std::size_t begin, std::size_t end) {
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (begin < end) out.push_back({begin, end});
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminal(text[i])) continue;
    std::size_t j = i + 1;
    if (j >= text.size() || !std::isspace(static_cast<unsigned char>(text[j]))) continue;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size() && starts_with_upper(text.substr(j))) {
      push(start, i + 1);
      start = j;
      i = j - 1;
    }
  }
  push(start, text.size());
  return out;
}

ExtractedSpan extract_span(const Passage& passage, const Utterance& query) {
  const auto sentences = split_sentences(passage.text);
  if (sentences.empty()) throw InvalidInput("passage " + passage.id + " has no text");
  const auto query_terms = distinct(content_tokens(query.tokens()));

  ExtractedSpan best{sentences.front(), passage.text.substr(sentences.front().start,
                                                             sentences.front().end - sentences.front().start),
                     0.0};
  if (query_terms.empty()) return best;
  for (const auto& s : sentences) {
    const auto slice = std::string_view(passage.text).substr(s.start, s.end - s.start);
    const auto tokens = tokenize(slice);
    const std::unordered_set<std::string> present(tokens.begin(), tokens.end());
    std::size_t hits = 0;
    for (const auto& t : query_terms) hits += present.contains(t) ? 1 : 0;
    const double score = static_cast<double>(hits) / static_cast<double>(query_terms.size());
    if (score > best.score) best = {s, std::string(slice), score};
  }
  return best;
}

FusedScore fuse_scores(double bm25, double bm25_max, double span_score, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw InvalidInput("fusion alpha must lie in [0, 1]");
  FusedScore out;
  out.bm25_norm = bm25_max > 0.0 ? bm25 / bm25_max : 0.0;
  out.fused = alpha * out.bm25_norm + (1.0 - alpha) * span_score;
  return out;
}

FactualAnswer answer_factual(const PassageIndex& index, const Utterance& query, std::size_t k, double alpha,
                             const SpanExtractor& extractor) {
  // Retrieval ignores stopwords unless the query has nothing else.
  auto terms = content_tokens(query.tokens());
  if (terms.empty()) terms = query.tokens();
  FactualAnswer answer;
  answer.retrieved = index.search(terms, k);
  if (answer.retrieved.empty()) return answer;

  double bm25_max = 0.0;
  for (const auto& hit : answer.retrieved) bm25_max = std::max(bm25_max, hit.bm25);
  for (const auto& hit : answer.retrieved) {
    const auto& passage = index.passages()[hit.ordinal];
    const auto extracted = extractor ? extractor(passage, query) : extract_span(passage, query);
    const auto fused = fuse_scores(hit.bm25, bm25_max, extracted.score, alpha);
    ScoredSpan candidate{passage.id,       extracted.span.start, extracted.span.end, extracted.text,
                         extracted.score,  hit.bm25,             fused.bm25_norm,    fused.fused};
    if (!answer.best || candidate.fused > answer.best->fused ||
        (candidate.fused == answer.best->fused && candidate.passage_id < answer.best->passage_id)) {
      answer.best = std::move(candidate);
    }
  }
  return answer;
}

std::string cap_words(std::string_view text, std::size_t max_words) {
  const std::string normalized = normalize_nfc(trim(text));
  const auto spans = tokenize_spans(normalized);
  if (spans.size() <= max_words) return with_terminal(normalized);
  return with_terminal(std::string_view(normalized).substr(0, spans[max_words - 1].end));
}

std::string paraphrase(std::string_view span_text, const Utterance& rewritten_query) {
  const std::string span(trim(span_text));
  if (span.empty()) throw InvalidInput("cannot paraphrase an empty span");
  const auto& qtext = rewritten_query.text();
  const auto q = tokenize_spans(qtext);

  if (q.size() >= 3 && q[0].token == "when" &&
      (q[1].token == "was" || q[1].token == "did" || q[1].token == "is" || q[1].token == "were")) {
    std::size_t last = q.size();
    while (last > 2 && is_stopword(q[last - 1].token)) --last;
    if (last > 2) {
      const auto focus = capitalize_first(qtext.substr(q[2].begin, q[last - 1].end - q[2].begin));
      std::string answer = span;
      if (!is_short_answer(span)) {
        std::smatch m;
        if (std::regex_search(span, m, date_pattern())) answer = m.str();
        else answer.clear();
      }
      if (!answer.empty()) return cap_words(focus + " was " + answer + ".");
    }
  } else if (!q.empty() && q[0].token == "who" && is_short_answer(span)) {
    return cap_words("It was " + span + ".");
  }
  return cap_words(capitalize_first(span));
}

}  // namespace led
