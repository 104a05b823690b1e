#include "led/text.hpp"

#include <algorithm>
#include <unordered_set>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace led {
namespace detail {
const std::vector<std::string_view>& stopword_list();
const std::vector<std::string_view>& verb_list();
}  // namespace detail

namespace {

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_word_char(UChar32 c) {
  if (c < 0x80) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  }
  if (u_isalnum(c)) return true;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK || type == U_ENCLOSING_MARK;
}

bool is_apostrophe(UChar32 c) { return c == 0x27 || c == 0x2019; }

std::string lowercase(std::string_view s) {
  if (is_ascii(s)) {
    std::string out(s);
    for (auto& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())))
      .toLower(icu::Locale::getRoot())
      .toUTF8String(out);
  return out;
}

struct CodePoint {
  UChar32 value;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i)});
  }
  return out;
}

const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> set(detail::stopword_list().begin(),
                                                        detail::stopword_list().end());
  return set;
}

const std::unordered_set<std::string_view>& verb_set() {
  static const std::unordered_set<std::string_view> set(detail::verb_list().begin(),
                                                        detail::verb_list().end());
  return set;
}

}  // namespace

std::string normalize_nfc(std::string_view text) {
  if (is_ascii(text)) return std::string(text);
  UErrorCode status = U_ZERO_ERROR;
  const auto* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(text);
  const auto source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const auto normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  const auto cps = decode(text);
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_word_char(cps[i].value)) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    while (i < cps.size()) {
      if (is_word_char(cps[i].value)) {
        ++i;
      } else if (is_apostrophe(cps[i].value) && i + 1 < cps.size() && is_word_char(cps[i + 1].value)) {
        ++i;
      } else {
        break;
      }
    }
    const std::size_t begin = cps[first].begin;
    const std::size_t end = cps[i - 1].end;
    auto token = lowercase(text.substr(begin, end - begin));
    // Curly apostrophes fold to ASCII so "don’t" and "don't" agree.
    for (std::size_t pos; (pos = token.find("\xE2\x80\x99")) != std::string::npos;) {
      token.replace(pos, 3, "'");
    }
    spans.push_back({std::move(token), begin, end});
  }
  return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
  const auto normalized = normalize_nfc(text);
  auto spans = tokenize_spans(normalized);
  std::vector<std::string> tokens;
  tokens.reserve(spans.size());
  for (auto& s : spans) tokens.push_back(std::move(s.token));
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string normalize_key(std::string_view text) { return join_tokens(tokenize(text)); }

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

bool is_stopword(std::string_view token) { return stopword_set().contains(token); }

bool is_stock_verb(std::string_view token) { return verb_set().contains(token); }

bool is_negation(std::string_view token) {
  if (token == "not" || token == "no" || token == "never" || token == "n't") return true;
  return token.size() > 3 && token.ends_with("n't");
}

std::vector<std::string> content_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (!is_stopword(t)) out.push_back(t);
  }
  return out;
}

std::size_t word_count(std::string_view text) { return tokenize(text).size(); }

bool starts_with_upper(std::string_view text) {
  if (text.empty()) return false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  int32_t i = 0;
  UChar32 c;
  U8_NEXT(bytes, i, static_cast<int32_t>(text.size()), c);
  return c >= 0 && (u_isupper(c) || u_istitle(c));
}

std::string capitalize_first(std::string text) {
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 'a' + 'A');
  return text;
}

}  // namespace led
