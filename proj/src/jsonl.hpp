#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "led/errors.hpp"
#include "led/text.hpp"

namespace led::detail {

/// Calls `fn(record, line_no)` for every non-blank line. Syntax errors are
/// reported as ParseError with the 1-based line number; `fn` may throw
/// InvalidInput to reject a record, which is rewrapped the same way.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string(), line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(path.string(), line_no, "expected a JSON object");
    try {
      fn(record, line_no);
    } catch (const InvalidInput& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
}

inline std::string required_string(const nlohmann::json& record, const char* field) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) throw InvalidInput(std::string("missing required field \"") + field + "\"");
  if (!it->is_string()) throw InvalidInput(std::string("field \"") + field + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace led::detail
