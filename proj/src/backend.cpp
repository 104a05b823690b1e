#include "led/backend.hpp"

#include <cmath>

#include <httplib.h>

#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

httplib::Client make_client(const RemoteEndpoint& endpoint) {
  httplib::Client client(endpoint.base_url);
  const auto ms = endpoint.timeout.count();
  client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
  return client;
}

nlohmann::json parse_response(const httplib::Result& res, const std::string& what) {
  if (!res) throw BackendError(what + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError(what + ": HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(what + ": malformed response body");
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* name, const std::string& what) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError(what + ": response lacks a valid \"" + name + "\" field");
  }
}

}  // namespace

JsonHttpClient::JsonHttpClient(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.base_url.empty()) throw InvalidInput("backend URL is empty");
}

nlohmann::json JsonHttpClient::get(const std::string& path) const {
  auto client = make_client(endpoint_);
  return parse_response(client.Get(path), "GET " + endpoint_.base_url + path);
}

nlohmann::json JsonHttpClient::post(const std::string& path, const nlohmann::json& body) const {
  auto client = make_client(endpoint_);
  return parse_response(client.Post(path, body.dump(), "application/json"), "POST " + endpoint_.base_url + path);
}

nlohmann::json context_to_json(const std::vector<ContextPair>& context) {
  auto out = nlohmann::json::array();
  for (const auto& c : context) out.push_back({{"user", c.user}, {"response", c.response}});
  return out;
}

std::string RemoteRewriter::rewrite(const std::string& query, const std::vector<ContextPair>& context) const {
  const auto res = client_.post("/v1/rewrite", {{"query", query}, {"context", context_to_json(context)}});
  auto text = field<std::string>(res, "rewritten", "rewrite backend");
  if (trim(text).empty()) throw BackendError("rewrite backend returned an empty rewrite");
  return text;
}

std::vector<Candidate> RemoteCandidateBackend::generate(const std::vector<ContextPair>& context,
                                                        const std::string& query, std::size_t n) {
  const auto res = client_.post("/v1/generate", {{"query", query}, {"context", context_to_json(context)}, {"n", n}});
  const auto list = field<nlohmann::json>(res, "candidates", "generate backend");
  if (!list.is_array()) throw BackendError("generate backend: candidates is not a list");
  std::vector<Candidate> out;
  for (const auto& c : list) {
    auto text = field<std::string>(c, "text", "generate backend");
    if (trim(text).empty()) continue;
    out.push_back({std::move(text), c.value("score", 0.0), {}, {}});
  }
  if (out.empty()) throw BackendError("generate backend returned no candidates");
  return out;
}

bool is_distribution(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) return false;
    sum += p;
  }
  return std::fabs(sum - 1.0) <= 1e-6;
}

RemoteLm::RemoteLm(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {
  const auto res = client_.get("/v1/vocab");
  vocabulary_ = field<std::vector<std::string>>(res, "vocabulary", "language model backend");
  eos_ = field<TokenId>(res, "eos", "language model backend");
  if (vocabulary_.empty() || eos_ >= vocabulary_.size()) throw BackendError("language model backend: bad vocabulary");
}

std::vector<double> RemoteLm::next_distribution(std::span<const TokenId> prefix) const {
  const auto res = client_.post("/v1/next", {{"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())}});
  auto probs = field<std::vector<double>>(res, "distribution", "language model backend");
  if (probs.size() != vocabulary_.size() || !is_distribution(probs)) {
    throw BackendError("language model backend returned an invalid distribution");
  }
  return probs;
}

ExtractedSpan RemoteExtractor::extract(const Passage& passage, const Utterance& query) const {
  const auto res = client_.post("/v1/extract", {{"query", query.text()}, {"passage", passage.text}});
  const auto start = field<std::size_t>(res, "start", "extract backend");
  const auto end = field<std::size_t>(res, "end", "extract backend");
  const auto score = field<double>(res, "score", "extract backend");
  if (start >= end || end > passage.text.size() || !(score >= 0.0 && score <= 1.0)) {
    throw BackendError("extract backend returned an invalid span");
  }
  return {{start, end}, passage.text.substr(start, end - start), score};
}

std::string RemoteParaphraser::paraphrase(const std::string& span, const Utterance& query,
                                          const std::vector<ContextPair>& context) const {
  const auto res = client_.post("/v1/paraphrase",
                                {{"query", query.text()}, {"span", span}, {"context", context_to_json(context)}});
  auto text = field<std::string>(res, "text", "paraphrase backend");
  if (trim(text).empty()) throw BackendError("paraphrase backend returned empty text");
  return text;
}

}  // namespace led
