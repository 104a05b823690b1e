#pragma once

// Last pipeline stage: rejects toxic candidates and candidates that
// contradict the bot's earlier responses, falling back to a neutral reply.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "led/core.hpp"

namespace led {

inline constexpr double kContradictionJaccard = 0.6;
inline constexpr std::string_view kDefaultFallback =
    "I'd rather not get into that \xE2\x80\x94 want to talk movies or music?";

class SafetyConfig {
 public:
  /// Throws InvalidInput if the fallback itself hits the blocklist.
  explicit SafetyConfig(std::vector<std::string> blocklist = {}, std::string fallback_text = std::string(kDefaultFallback),
                        double jaccard_threshold = kContradictionJaccard);

  /// One term or phrase per line; `#` starts a comment line.
  static std::vector<std::string> load_blocklist(const std::filesystem::path& path);

  const std::vector<std::vector<std::string>>& blocked_phrases() const noexcept { return phrases_; }
  const std::string& fallback_text() const noexcept { return fallback_; }
  double jaccard_threshold() const noexcept { return jaccard_; }

 private:
  std::vector<std::vector<std::string>> phrases_;  // tokenized
  std::string fallback_;
  double jaccard_;
};

/// True iff some blocked phrase occurs as a contiguous token run.
bool check_toxic(std::string_view text, const SafetyConfig& config);

/// Multiset Jaccard similarity over content tokens (stopwords and negations removed).
double content_jaccard(std::string_view a, std::string_view b);

/// Flags a candidate that restates an earlier bot response with the opposite
/// negation parity.
bool check_inconsistent(std::string_view candidate, const ConversationState& state,
                        double jaccard_threshold = kContradictionJaccard);

struct GateResult {
  std::string response;
  std::vector<Candidate> candidates;  // every candidate with its verdict
  std::optional<std::size_t> chosen;  // empty when the fallback was emitted
  bool fallback = false;
};

/// Assigns a verdict to every candidate (toxicity checked first) and returns
/// the first passing one, or the fallback text if none pass.
GateResult gate(std::vector<Candidate> candidates, const ConversationState& state, const SafetyConfig& config);

}  // namespace led
