#pragma once

// Engine configuration. The on-disk form is a versioned JSON tree; relative
// paths resolve against the config file's directory. Any leaf can be
// overridden from the environment as LED_<SECTION>_<KEY> (nested keys joined
// with underscores, uppercased), e.g. LED_ROUTER_THRESHOLD=0.75.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "led/backend.hpp"
#include "led/generator.hpp"
#include "led/knowledge.hpp"
#include "led/router.hpp"

namespace led {

inline constexpr int kConfigVersion = 1;

struct ResourcePaths {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> index;
  std::optional<std::filesystem::path> gazetteer;
  std::optional<std::filesystem::path> blocklist;
  std::optional<std::filesystem::path> bank;
  std::optional<std::filesystem::path> router_model;
  std::optional<std::filesystem::path> router_training;
};

struct BackendEndpoints {
  std::optional<RemoteEndpoint> rewriter;
  std::optional<RemoteEndpoint> generator;
  std::optional<RemoteEndpoint> lm;
  std::optional<RemoteEndpoint> extractor;
  std::optional<RemoteEndpoint> paraphraser;
};

struct ServerSettings {
  std::size_t max_concurrent_turns = 64;
  std::chrono::seconds session_ttl{30 * 60};
  std::optional<std::filesystem::path> session_log;
};

struct PipelineConfig {
  ResourcePaths resources;
  RouterConfig router;
  TrainOptions router_training;
  Bm25Params bm25;
  std::size_t top_k = kDefaultTopK;
  double alpha = kDefaultFusionAlpha;
  std::size_t candidates = kDefaultCandidateCount;
  DecodeConfig decode;
  std::size_t max_context = kDefaultMaxContext;
  double decay = kDefaultDecay;
  std::string fallback_text;
  double jaccard_threshold = 0.6;
  BackendEndpoints backends;
  ServerSettings server;
};

/// Default settings tree, merged under every loaded config.
nlohmann::json default_config_tree();

/// Parses a config tree. `base_dir` anchors relative paths. `env` supplies
/// overrides (normally the process environment).
PipelineConfig parse_config(const nlohmann::json& tree, const std::filesystem::path& base_dir,
                            const std::map<std::string, std::string>& env = {});

/// Reads a config file and applies LED_* environment overrides.
PipelineConfig load_config(const std::filesystem::path& path);

std::map<std::string, std::string> led_environment();

}  // namespace led
