#pragma once

// HTTP clients for optional external model backends. Every backend speaks
// JSON over HTTP/1.1 and shares the same request shape: the conversation
// context pairs plus the rewritten query.
//
//   POST /v1/rewrite     {"query", "context"}               -> {"rewritten"}
//   POST /v1/generate    {"query", "context", "n"}          -> {"candidates": [{"text", "score"}]}
//   GET  /v1/vocab                                          -> {"vocabulary": [...], "eos": id}
//   POST /v1/next        {"prefix": [ids]}                  -> {"distribution": [...]}
//   POST /v1/extract     {"query", "passage"}               -> {"start", "end", "score"}
//   POST /v1/paraphrase  {"query", "span", "context"}       -> {"text"}
//
// Failures (connection, timeout, non-200, malformed body) raise BackendError.

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "led/core.hpp"
#include "led/generator.hpp"
#include "led/knowledge.hpp"

namespace led {

struct RemoteEndpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:9000"
  std::chrono::milliseconds timeout{2000};
};

class JsonHttpClient {
 public:
  explicit JsonHttpClient(RemoteEndpoint endpoint);

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  RemoteEndpoint endpoint_;
};

nlohmann::json context_to_json(const std::vector<ContextPair>& context);

class RemoteRewriter {
 public:
  explicit RemoteRewriter(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}
  /// Throws BackendError on failure or an empty rewrite.
  std::string rewrite(const std::string& query, const std::vector<ContextPair>& context) const;

 private:
  JsonHttpClient client_;
};

class RemoteCandidateBackend final : public CandidateBackend {
 public:
  explicit RemoteCandidateBackend(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}
  std::vector<Candidate> generate(const std::vector<ContextPair>& context, const std::string& query,
                                  std::size_t n) override;

 private:
  JsonHttpClient client_;
};

/// Language model served over HTTP. The vocabulary is fetched once.
class RemoteLm final : public LmBackend {
 public:
  explicit RemoteLm(RemoteEndpoint endpoint);
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  TokenId eos() const override { return eos_; }
  std::vector<double> next_distribution(std::span<const TokenId> prefix) const override;

 private:
  JsonHttpClient client_;
  std::vector<std::string> vocabulary_;
  TokenId eos_ = 0;
};

class RemoteExtractor {
 public:
  explicit RemoteExtractor(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}
  ExtractedSpan extract(const Passage& passage, const Utterance& query) const;

 private:
  JsonHttpClient client_;
};

class RemoteParaphraser {
 public:
  explicit RemoteParaphraser(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}
  std::string paraphrase(const std::string& span, const Utterance& query,
                         const std::vector<ContextPair>& context) const;

 private:
  JsonHttpClient client_;
};

/// Checks a probability vector: finite, non-negative, sums to 1 within 1e-6.
bool is_distribution(const std::vector<double>& probs);

}  // namespace led
