#pragma once

// Shared text handling: Unicode normalization, the word tokenizer used by
// every stage, and the closed word lists.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace led {

/// NFC-normalizes UTF-8 text. Invalid sequences are replaced with U+FFFD.
std::string normalize_nfc(std::string_view text);

/// A token together with its byte range in the (normalized) source text.
struct TokenSpan {
  std::string token;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Tokenizes already-normalized text, keeping byte offsets into `text`.
/// Word characters are Unicode letters, digits and combining marks; an
/// apostrophe is kept only when it sits between two word characters.
/// Tokens are lowercased.
std::vector<TokenSpan> tokenize_spans(std::string_view text);

/// Normalizes then tokenizes. Empty input yields an empty list.
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

/// Lowercased, tokenized, space-joined form used as a lookup key.
std::string normalize_key(std::string_view text);

std::string_view trim(std::string_view s);

bool is_stopword(std::string_view token);
bool is_stock_verb(std::string_view token);

/// True for "not", "no", "never" and contractions ending in "n't".
bool is_negation(std::string_view token);

/// Tokens of `text` with stopwords removed, in order.
std::vector<std::string> content_tokens(const std::vector<std::string>& tokens);

/// Number of words as counted by the shared tokenizer.
std::size_t word_count(std::string_view text);

bool starts_with_upper(std::string_view text);

/// Uppercases the first code point when it is an ASCII letter.
std::string capitalize_first(std::string text);

}  // namespace led
