#include "led/resolver.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

constexpr std::array<std::string_view, 11> kPronouns = {"it",   "he",  "she", "they", "them", "that",
                                                        "this", "his", "her", "its",  "their"};

constexpr std::array<std::string_view, 20> kDiscourseTokens = {
    "hi",   "hello", "hey",   "thanks", "thank", "ok",   "okay", "yes", "yeah", "no",
    "nope", "bye",   "goodbye", "cool", "nice",  "great", "wow", "sure", "lol", "hmm"};

bool is_pronoun(std::string_view t) {
  return std::find(kPronouns.begin(), kPronouns.end(), t) != kPronouns.end();
}

bool is_possessive(std::string_view t) { return t == "his" || t == "its" || t == "their"; }

bool is_discourse(std::string_view t) {
  return std::find(kDiscourseTokens.begin(), kDiscourseTokens.end(), t) != kDiscourseTokens.end();
}

bool only_whitespace(std::string_view s) { return trim(s).empty(); }

bool ends_sentence(std::string_view gap) {
  return gap.find_first_of(".?!") != std::string_view::npos;
}

struct Mention {
  std::size_t begin;  // byte offsets
  std::size_t end;
  int priority;  // lower wins on overlap
};

void add_capitalized_runs(std::string_view text, const std::vector<TokenSpan>& spans,
                          std::vector<Mention>& out) {
  std::size_t i = 0;
  while (i < spans.size()) {
    if (!starts_with_upper(text.substr(spans[i].begin))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < spans.size() && starts_with_upper(text.substr(spans[j].begin)) &&
           only_whitespace(text.substr(spans[j - 1].end, spans[j].begin - spans[j - 1].end))) {
      ++j;
    }
    std::size_t first = i;
    std::size_t last = j;  // exclusive
    const bool sentence_initial =
        first == 0 || ends_sentence(text.substr(spans[first - 1].end, spans[first].begin - spans[first - 1].end));
    if (sentence_initial && first < last &&
        (is_stock_verb(spans[first].token) || is_discourse(spans[first].token))) {
      ++first;
    }
    while (first < last && is_stopword(spans[first].token)) ++first;
    while (last > first && is_stopword(spans[last - 1].token)) --last;
    if (first < last) out.push_back({spans[first].begin, spans[last - 1].end, 2});
    i = j;
  }
}

void add_quoted(std::string_view text, std::vector<Mention>& out) {
  static const std::array<std::pair<std::string_view, std::string_view>, 2> kQuotes = {
      {{"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}}};
  for (const auto& [open, close] : kQuotes) {
    std::size_t pos = 0;
    while ((pos = text.find(open, pos)) != std::string_view::npos) {
      const std::size_t inner = pos + open.size();
      const std::size_t stop = text.find(close, inner);
      if (stop == std::string_view::npos) break;
      auto phrase = text.substr(inner, stop - inner);
      const auto trimmed = trim(phrase);
      if (!tokenize_spans(trimmed).empty()) {
        const std::size_t begin = inner + static_cast<std::size_t>(trimmed.data() - phrase.data());
        out.push_back({begin, begin + trimmed.size(), 0});
      }
      pos = stop + close.size();
    }
  }
}

void add_gazetteer_matches(const std::vector<TokenSpan>& spans, const Gazetteer& gazetteer,
                           std::vector<Mention>& out) {
  std::size_t i = 0;
  while (i < spans.size()) {
    std::size_t matched = 0;
    for (std::size_t n = std::min(gazetteer.max_tokens(), spans.size() - i); n >= 1; --n) {
      std::string key;
      for (std::size_t k = i; k < i + n; ++k) {
        if (!key.empty()) key.push_back(' ');
        key += spans[k].token;
      }
      if (gazetteer.contains_key(key)) {
        matched = n;
        break;
      }
    }
    if (matched > 0) {
      out.push_back({spans[i].begin, spans[i + matched - 1].end, 1});
      i += matched;
    } else {
      ++i;
    }
  }
}

auto entity_order(const Entity& a, const Entity& b) {
  if (a.salience != b.salience) return a.salience > b.salience;
  if (a.last_turn != b.last_turn) return a.last_turn > b.last_turn;
  if (a.surface != b.surface) return a.surface < b.surface;
  return a.entity_type < b.entity_type;
}

bool same_entity(const Entity& a, const Entity& b) {
  return normalize_key(a.surface) == normalize_key(b.surface) && a.entity_type == b.entity_type;
}

}  // namespace

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open gazetteer: " + path.string());
  Gazetteer g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos) throw ParseError(path.string(), line_no, "expected surface<TAB>type");
    const auto surface = trim(body.substr(0, tab));
    const auto type = trim(body.substr(tab + 1));
    if (normalize_key(surface).empty() || type.empty()) {
      throw ParseError(path.string(), line_no, "empty surface or type");
    }
    g.add(surface, type);
  }
  return g;
}

void Gazetteer::add(std::string_view surface, std::string_view entity_type) {
  const auto key = normalize_key(surface);
  if (key.empty()) throw InvalidInput("gazetteer surface has no tokens");
  auto& types = types_[key];
  const std::string type(entity_type);
  if (std::find(types.begin(), types.end(), type) == types.end()) types.push_back(type);
  max_tokens_ = std::max(max_tokens_, tokenize(surface).size());
}

std::optional<std::string> Gazetteer::lookup(std::string_view surface) const {
  const auto it = types_.find(normalize_key(surface));
  if (it == types_.end()) return std::nullopt;
  return it->second.front();
}

std::optional<std::string> Gazetteer::lookup(std::string_view surface,
                                             const std::vector<std::string>& context_tokens) const {
  const auto it = types_.find(normalize_key(surface));
  if (it == types_.end()) return std::nullopt;
  for (const auto& type : it->second) {
    if (std::find(context_tokens.begin(), context_tokens.end(), normalize_key(type)) != context_tokens.end()) {
      return type;
    }
  }
  return it->second.front();
}

std::vector<Entity> extract_entities(std::string_view raw_text, const Gazetteer& gazetteer) {
  const auto text = normalize_nfc(raw_text);
  const auto spans = tokenize_spans(text);
  std::vector<std::string> context_tokens;
  for (const auto& s : spans) context_tokens.push_back(s.token);

  std::vector<Mention> mentions;
  add_quoted(text, mentions);
  add_gazetteer_matches(spans, gazetteer, mentions);
  add_capitalized_runs(text, spans, mentions);

  std::stable_sort(mentions.begin(), mentions.end(),
                   [](const Mention& a, const Mention& b) { return a.priority < b.priority; });
  std::vector<Mention> accepted;
  for (const auto& m : mentions) {
    const bool overlaps = std::any_of(accepted.begin(), accepted.end(), [&](const Mention& a) {
      return m.begin < a.end && a.begin < m.end;
    });
    if (!overlaps) accepted.push_back(m);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Mention& a, const Mention& b) { return a.begin < b.begin; });

  std::vector<Entity> out;
  std::set<std::pair<std::string, std::optional<std::string>>> seen;
  for (const auto& m : accepted) {
    const auto surface = std::string(text.substr(m.begin, m.end - m.begin));
    const auto key = normalize_key(surface);
    if (key.empty() || key == "i") continue;
    auto type = gazetteer.lookup(surface, context_tokens);
    if (!seen.insert({key, type}).second) continue;
    out.push_back(Entity{surface, std::move(type), 0, 1.0});
  }
  return out;
}

std::vector<Entity> decay_and_merge(std::vector<Entity> stack, std::vector<Entity> mentioned, double decay) {
  for (auto& e : stack) e.salience *= decay;
  for (auto& m : mentioned) {
    auto it = std::find_if(stack.begin(), stack.end(), [&](const Entity& e) { return same_entity(e, m); });
    if (it != stack.end()) {
      it->salience = 1.0;
      it->last_turn = std::max(it->last_turn, m.last_turn);
    } else {
      m.salience = 1.0;
      stack.push_back(std::move(m));
    }
  }
  std::sort(stack.begin(), stack.end(), entity_order);
  return stack;
}

std::string render_entity(const Entity& entity) {
  if (entity.entity_type) return "the " + entity.surface + " " + *entity.entity_type;
  return entity.surface;
}

RewriteResult rewrite(const Utterance& query, const ConversationState& state, const Gazetteer& gazetteer) {
  RewriteResult result{query, {}, RewriteBackend::Baseline};
  if (state.entities.empty() || !extract_entities(query.text(), gazetteer).empty()) return result;

  const Entity& top = state.entities.front();
  const auto rendering = render_entity(top);
  const auto& text = query.text();
  const auto spans = tokenize_spans(text);
  const auto type_key = top.entity_type ? normalize_key(*top.entity_type) : std::string();

  std::string out;
  std::size_t copied = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& tok = spans[i].token;
    if (!is_pronoun(tok)) continue;
    const std::size_t begin = spans[i].begin;
    std::size_t end = spans[i].end;
    // "that one", "this song": the determiner and its head noun are replaced together.
    if ((tok == "that" || tok == "this") && i + 1 < spans.size() &&
        (spans[i + 1].token == "one" || (!type_key.empty() && spans[i + 1].token == type_key)) &&
        only_whitespace(std::string_view(text).substr(spans[i].end, spans[i + 1].begin - spans[i].end))) {
      end = spans[i + 1].end;
      ++i;
    }
    auto replacement = rendering;
    if (is_possessive(tok)) replacement += "'s";
    if (begin == 0) replacement = capitalize_first(std::move(replacement));
    out.append(text, copied, begin - copied);
    out += replacement;
    copied = end;
    result.substitutions.push_back({begin, end, top.surface, top.entity_type});
  }

  if (!result.substitutions.empty()) {
    out.append(text, copied, std::string::npos);
    result.rewritten = Utterance(out);
    return result;
  }

  const auto& tokens = query.tokens();
  const bool short_query = !tokens.empty() && tokens.size() <= 4;
  const bool has_verb = std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return is_stock_verb(t); });
  const bool has_content = std::any_of(tokens.begin(), tokens.end(), [](const auto& t) {
    return !is_stopword(t) && !is_discourse(t);
  });
  if (short_query && !has_verb && has_content) {
    const std::size_t at = spans.back().end;
    out = text.substr(0, at) + " of " + (top.entity_type ? rendering : top.surface) + text.substr(at);
    result.substitutions.push_back({at, at, top.surface, top.entity_type});
    result.rewritten = Utterance(out);
  }
  return result;
}

}  // namespace led
