#include "led/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "led/errors.hpp"
#include "led/safety.hpp"

extern char** environ;

namespace led {
namespace {

void merge_into(nlohmann::json& base, const nlohmann::json& overlay) {
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge_into(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

std::string env_name(const std::string& prefix, const std::string& key) {
  std::string out = prefix + "_";
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

nlohmann::json env_value(const std::string& raw, const nlohmann::json& current) {
  if (current.is_string() || current.is_null()) {
    // null leaves are optional paths/URLs; treat the override as a string
    return raw;
  }
  try {
    return nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput("environment override is not a valid value: " + raw);
  }
}

void apply_env(nlohmann::json& node, const std::string& prefix, const std::map<std::string, std::string>& env) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const auto name = env_name(prefix, it.key());
    if (it.value().is_object()) {
      apply_env(it.value(), name, env);
    } else if (const auto e = env.find(name); e != env.end()) {
      it.value() = env_value(e->second, it.value());
    }
  }
}

std::optional<std::filesystem::path> path_at(const nlohmann::json& section, const char* key,
                                             const std::filesystem::path& base) {
  if (!section.contains(key) || section[key].is_null()) return std::nullopt;
  const auto raw = section[key].get<std::string>();
  if (raw.empty()) return std::nullopt;
  std::filesystem::path p(raw);
  return p.is_absolute() ? p : base / p;
}

std::optional<RemoteEndpoint> endpoint_at(const nlohmann::json& backends, const char* key) {
  if (!backends.contains(key) || backends[key].is_null()) return std::nullopt;
  const auto& b = backends[key];
  if (!b.contains("url") || b["url"].is_null()) return std::nullopt;
  const auto url = b["url"].get<std::string>();
  if (url.empty()) return std::nullopt;
  return RemoteEndpoint{url, std::chrono::milliseconds(b.value("timeout_ms", 2000))};
}

}  // namespace

nlohmann::json default_config_tree() {
  return {
      {"version", kConfigVersion},
      {"resources",
       {{"corpus", nullptr},
        {"index", nullptr},
        {"gazetteer", nullptr},
        {"blocklist", nullptr},
        {"bank", nullptr},
        {"router_model", nullptr},
        {"router_training", nullptr}}},
      {"router",
       {{"threshold", kDefaultFactualThreshold}, {"dim", kDefaultFeatureDim}, {"epochs", 5}, {"learning_rate", 0.1}, {"seed", 0}}},
      {"retrieval", {{"k", kDefaultTopK}, {"alpha", kDefaultFusionAlpha}, {"k1", 1.2}, {"b", 0.75}}},
      {"generator",
       {{"candidates", kDefaultCandidateCount},
        {"mode", "beam"},
        {"beam_width", 4},
        {"k", 10},
        {"max_len", 32},
        {"seed", 0},
        {"length_normalize", false}}},
      {"context", {{"max_context", kDefaultMaxContext}, {"decay", kDefaultDecay}}},
      {"safety", {{"fallback", std::string(kDefaultFallback)}, {"jaccard", kContradictionJaccard}}},
      {"backends",
       {{"rewriter", {{"url", nullptr}, {"timeout_ms", 2000}}},
        {"generator", {{"url", nullptr}, {"timeout_ms", 2000}}},
        {"lm", {{"url", nullptr}, {"timeout_ms", 2000}}},
        {"extractor", {{"url", nullptr}, {"timeout_ms", 2000}}},
        {"paraphraser", {{"url", nullptr}, {"timeout_ms", 2000}}}}},
      {"server", {{"max_concurrent_turns", 64}, {"session_ttl_seconds", 1800}, {"session_log", nullptr}}},
  };
}

PipelineConfig parse_config(const nlohmann::json& tree, const std::filesystem::path& base_dir,
                            const std::map<std::string, std::string>& env) {
  if (!tree.is_object()) throw InvalidInput("config must be a JSON object");
  const int version = tree.value("version", kConfigVersion);
  if (version != kConfigVersion) throw InvalidInput("unsupported config version " + std::to_string(version));

  auto merged = default_config_tree();
  merge_into(merged, tree);
  apply_env(merged, "LED", env);

  PipelineConfig c;
  try {
    const auto& res = merged["resources"];
    c.resources = {path_at(res, "corpus", base_dir),    path_at(res, "index", base_dir),
                   path_at(res, "gazetteer", base_dir), path_at(res, "blocklist", base_dir),
                   path_at(res, "bank", base_dir),      path_at(res, "router_model", base_dir),
                   path_at(res, "router_training", base_dir)};

    const auto& router = merged["router"];
    c.router.threshold = router["threshold"].get<double>();
    c.router_training.dim = router["dim"].get<std::uint32_t>();
    c.router_training.epochs = router["epochs"].get<int>();
    c.router_training.learning_rate = router["learning_rate"].get<double>();
    c.router_training.seed = router["seed"].get<std::uint64_t>();

    const auto& retrieval = merged["retrieval"];
    c.top_k = retrieval["k"].get<std::size_t>();
    c.alpha = retrieval["alpha"].get<double>();
    c.bm25 = {retrieval["k1"].get<double>(), retrieval["b"].get<double>()};

    const auto& gen = merged["generator"];
    c.candidates = gen["candidates"].get<std::size_t>();
    const auto mode = gen["mode"].get<std::string>();
    if (mode == "beam") c.decode.mode = DecodeMode::Beam;
    else if (mode == "topk") c.decode.mode = DecodeMode::TopK;
    else throw InvalidInput("generator.mode must be \"beam\" or \"topk\"");
    c.decode.beam_width = gen["beam_width"].get<int>();
    c.decode.k = gen["k"].get<int>();
    c.decode.max_len = gen["max_len"].get<int>();
    c.decode.seed = gen["seed"].get<std::uint64_t>();
    c.decode.length_normalize = gen["length_normalize"].get<bool>();

    c.max_context = merged["context"]["max_context"].get<std::size_t>();
    c.decay = merged["context"]["decay"].get<double>();
    c.fallback_text = merged["safety"]["fallback"].get<std::string>();
    c.jaccard_threshold = merged["safety"]["jaccard"].get<double>();

    const auto& backends = merged["backends"];
    c.backends = {endpoint_at(backends, "rewriter"), endpoint_at(backends, "generator"), endpoint_at(backends, "lm"),
                  endpoint_at(backends, "extractor"), endpoint_at(backends, "paraphraser")};

    const auto& server = merged["server"];
    c.server.max_concurrent_turns = server["max_concurrent_turns"].get<std::size_t>();
    c.server.session_ttl = std::chrono::seconds(server["session_ttl_seconds"].get<std::int64_t>());
    c.server.session_log = path_at(server, "session_log", base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invalid config value: ") + e.what());
  }

  if (c.router.threshold < 0.0 || c.router.threshold > 1.0) throw InvalidInput("router.threshold must lie in [0, 1]");
  if (c.alpha < 0.0 || c.alpha > 1.0) throw InvalidInput("retrieval.alpha must lie in [0, 1]");
  if (c.top_k == 0) throw InvalidInput("retrieval.k must be at least 1");
  if (c.candidates == 0) throw InvalidInput("generator.candidates must be at least 1");
  if (c.max_context == 0) throw InvalidInput("context.max_context must be at least 1");
  if (c.server.max_concurrent_turns == 0) throw InvalidInput("server.max_concurrent_turns must be at least 1");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open config: " + path.string());
  nlohmann::json tree;
  try {
    tree = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config " + path.string() + ": " + e.what());
  }
  return parse_config(tree, std::filesystem::absolute(path).parent_path(), led_environment());
}

std::map<std::string, std::string> led_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with("LED_")) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

}  // namespace led
