#pragma once

// Dialog dataset records (QReCC-style and internal-media-style turns),
// loaders and validators.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "led/router.hpp"

namespace led {

struct DialogTurnRecord {
  std::string conversation_id;
  int turn_no = 0;
  std::string question;
  std::string rewrite;
  std::optional<std::string> answer;
  std::optional<std::string> answer_url;
  std::optional<std::string> paraphrase;
  std::optional<int> is_factual;

  friend bool operator==(const DialogTurnRecord&, const DialogTurnRecord&) = default;
};

nlohmann::json to_json(const DialogTurnRecord& record);
DialogTurnRecord dialog_record_from_json(const nlohmann::json& j);

/// Empty file -> empty list. Malformed lines throw ParseError naming the line.
std::vector<DialogTurnRecord> load_dialog_dataset(const std::filesystem::path& path);
void save_dialog_dataset(const std::vector<DialogTurnRecord>& records, const std::filesystem::path& path);

enum class DatasetProfile { QReCC, InternalMedia };

/// Accepts "qrecc" and "internal-media".
DatasetProfile profile_from_string(std::string_view name);

inline constexpr std::size_t kTurnsPerConversation = 10;

struct Violation {
  std::string rule;     // "turn-count", "length-bound", "numbering", "rewrite-missing", "duplicate-turn"
  std::string locator;  // conversation id, optionally "#turn"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::size_t record_count = 0;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::vector<Violation> by_rule(std::string_view rule) const;
};

ValidationReport validate_dataset(const std::vector<DialogTurnRecord>& records, DatasetProfile profile);

struct RouterTrainingSet {
  std::vector<LabeledQuestion> questions;
  std::size_t skipped = 0;
};

/// (rewrite, is_factual) pairs; unlabeled records are skipped and counted.
/// Throws InvalidInput when no record carries a label.
RouterTrainingSet derive_router_training(const std::vector<DialogTurnRecord>& records);

}  // namespace led
