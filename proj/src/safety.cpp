#include "led/safety.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

std::map<std::string, int> content_multiset(std::string_view text) {
  std::map<std::string, int> counts;
  for (const auto& t : tokenize(text)) {
    if (is_stopword(t) || is_negation(t)) continue;
    ++counts[t];
  }
  return counts;
}

int negation_count(std::string_view text) {
  const auto tokens = tokenize(text);
  return static_cast<int>(std::count_if(tokens.begin(), tokens.end(), [](const auto& t) { return is_negation(t); }));
}

}  // namespace

SafetyConfig::SafetyConfig(std::vector<std::string> blocklist, std::string fallback_text, double jaccard_threshold)
    : fallback_(std::move(fallback_text)), jaccard_(jaccard_threshold) {
  for (const auto& entry : blocklist) {
    auto tokens = tokenize(entry);
    if (!tokens.empty()) phrases_.push_back(std::move(tokens));
  }
  if (trim(fallback_).empty()) throw InvalidInput("fallback text is empty");
  if (check_toxic(fallback_, *this)) throw InvalidInput("fallback text matches the blocklist");
}

std::vector<std::string> SafetyConfig::load_blocklist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open blocklist: " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    out.emplace_back(body);
  }
  return out;
}

bool check_toxic(std::string_view text, const SafetyConfig& config) {
  const auto tokens = tokenize(text);
  for (const auto& phrase : config.blocked_phrases()) {
    if (std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end()) return true;
  }
  return false;
}

double content_jaccard(std::string_view a, std::string_view b) {
  const auto ca = content_multiset(a);
  const auto cb = content_multiset(b);
  std::size_t inter = 0, uni = 0;
  auto i = ca.begin();
  auto j = cb.begin();
  while (i != ca.end() || j != cb.end()) {
    if (j == cb.end() || (i != ca.end() && i->first < j->first)) {
      uni += static_cast<std::size_t>(i->second);
      ++i;
    } else if (i == ca.end() || j->first < i->first) {
      uni += static_cast<std::size_t>(j->second);
      ++j;
    } else {
      inter += static_cast<std::size_t>(std::min(i->second, j->second));
      uni += static_cast<std::size_t>(std::max(i->second, j->second));
      ++i;
      ++j;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

bool check_inconsistent(std::string_view candidate, const ConversationState& state, double jaccard_threshold) {
  const int parity = negation_count(candidate) % 2;
  for (const auto& turn : state.turns) {
    if (content_jaccard(turn.response, candidate) >= jaccard_threshold &&
        negation_count(turn.response) % 2 != parity) {
      return true;
    }
  }
  return false;
}

GateResult gate(std::vector<Candidate> candidates, const ConversationState& state, const SafetyConfig& config) {
  GateResult result;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (check_toxic(c.text, config)) {
      c.verdict = Verdict::Toxic;
      c.reason = "matches blocklist";
    } else if (check_inconsistent(c.text, state, config.jaccard_threshold())) {
      c.verdict = Verdict::Inconsistent;
      c.reason = "contradicts an earlier response";
    } else {
      c.verdict = Verdict::Pass;
      c.reason.clear();
      if (!result.chosen) result.chosen = i;
    }
  }
  if (result.chosen) {
    result.response = candidates[*result.chosen].text;
  } else {
    result.response = config.fallback_text();
    result.fallback = true;
  }
  result.candidates = std::move(candidates);
  return result;
}

}  // namespace led
