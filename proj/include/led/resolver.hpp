#pragma once

// Reference resolution: turns a follow-up question into a self-contained one
// by substituting pronouns and completing ellipses from the entity salience
// stack, adding the entity type where known ("the Skyfall song").

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "led/core.hpp"

namespace led {

/// Surface -> entity type lookup. Surfaces are keyed by their normalized
/// token form, so lookups are case-insensitive. A surface may carry more than
/// one type (Skyfall the song and Skyfall the movie); the first listed type is
/// the default and a type word present in the utterance selects among them.
class Gazetteer {
 public:
  Gazetteer() = default;

  /// Reads `surface<TAB>type` lines. Blank lines and `#` comments are skipped.
  static Gazetteer load(const std::filesystem::path& path);

  void add(std::string_view surface, std::string_view entity_type);

  /// Default type for a surface, if known.
  std::optional<std::string> lookup(std::string_view surface) const;

  /// Type for a surface, preferring one whose name occurs in `context_tokens`.
  std::optional<std::string> lookup(std::string_view surface,
                                    const std::vector<std::string>& context_tokens) const;

  bool contains_key(const std::string& key) const { return types_.contains(key); }
  std::size_t max_tokens() const noexcept { return max_tokens_; }
  std::size_t size() const noexcept { return types_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> types_;
  std::size_t max_tokens_ = 0;
};

enum class RewriteBackend { Baseline, External };

struct Substitution {
  std::size_t start = 0;  // byte range replaced in the source text; empty for an insertion
  std::size_t end = 0;
  std::string surface;
  std::optional<std::string> entity_type;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

struct RewriteResult {
  Utterance rewritten;
  std::vector<Substitution> substitutions;
  RewriteBackend backend = RewriteBackend::Baseline;
};

/// Capitalized token runs, quoted phrases and gazetteer matches, in text
/// order, each with salience 1.0.
std::vector<Entity> extract_entities(std::string_view text, const Gazetteer& gazetteer);

/// Decays every existing salience by `decay`, then promotes re-mentioned and
/// new entities to salience 1.0. The result is ordered by salience, then
/// recency, then surface.
std::vector<Entity> decay_and_merge(std::vector<Entity> stack, std::vector<Entity> mentioned,
                                    double decay = kDefaultDecay);

/// "the Skyfall song" when the type is known, else "Skyfall".
std::string render_entity(const Entity& entity);

RewriteResult rewrite(const Utterance& query, const ConversationState& state, const Gazetteer& gazetteer);

}  // namespace led
