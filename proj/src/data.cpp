#include "led/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "jsonl.hpp"
#include "led/errors.hpp"
#include "led/knowledge.hpp"
#include "led/text.hpp"

namespace led {
namespace {

std::optional<std::string> optional_string(const nlohmann::json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InvalidInput(std::string("field \"") + field + "\" must be a string");
  return it->get<std::string>();
}

std::optional<int> optional_flag(const nlohmann::json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_boolean()) return it->get<bool>() ? 1 : 0;
  if (it->is_number_integer()) {
    const int v = it->get<int>();
    if (v == 0 || v == 1) return v;
  }
  throw InvalidInput(std::string("field \"") + field + "\" must be 0 or 1");
}

}  // namespace

nlohmann::json to_json(const DialogTurnRecord& r) {
  nlohmann::json j = {{"conversation_id", r.conversation_id},
                      {"turn_no", r.turn_no},
                      {"question", r.question},
                      {"rewrite", r.rewrite}};
  if (r.answer) j["answer"] = *r.answer;
  if (r.answer_url) j["answer_url"] = *r.answer_url;
  if (r.paraphrase) j["paraphrase"] = *r.paraphrase;
  if (r.is_factual) j["is_factual"] = *r.is_factual;
  return j;
}

DialogTurnRecord dialog_record_from_json(const nlohmann::json& j) {
  DialogTurnRecord r;
  r.conversation_id = detail::required_string(j, "conversation_id");
  const auto turn = j.find("turn_no");
  if (turn == j.end() || !turn->is_number_integer()) throw InvalidInput("missing required field \"turn_no\"");
  r.turn_no = turn->get<int>();
  if (r.turn_no < 1) throw InvalidInput("turn_no must be positive");
  r.question = detail::required_string(j, "question");
  r.rewrite = detail::required_string(j, "rewrite");
  if (trim(r.question).empty()) throw InvalidInput("field \"question\" is empty");
  if (trim(r.rewrite).empty()) throw InvalidInput("field \"rewrite\" is empty");
  r.answer = optional_string(j, "answer");
  r.answer_url = optional_string(j, "answer_url");
  r.paraphrase = optional_string(j, "paraphrase");
  r.is_factual = optional_flag(j, "is_factual");
  return r;
}

std::vector<DialogTurnRecord> load_dialog_dataset(const std::filesystem::path& path) {
  std::vector<DialogTurnRecord> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t) { out.push_back(dialog_record_from_json(rec)); });
  return out;
}

void save_dialog_dataset(const std::vector<DialogTurnRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ResourceError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

DatasetProfile profile_from_string(std::string_view name) {
  if (name == "qrecc") return DatasetProfile::QReCC;
  if (name == "internal-media") return DatasetProfile::InternalMedia;
  throw InvalidInput("unknown dataset profile: " + std::string(name) + " (expected qrecc or internal-media)");
}

std::vector<Violation> ValidationReport::by_rule(std::string_view rule) const {
  std::vector<Violation> out;
  std::copy_if(violations.begin(), violations.end(), std::back_inserter(out),
               [&](const Violation& v) { return v.rule == rule; });
  return out;
}

ValidationReport validate_dataset(const std::vector<DialogTurnRecord>& records, DatasetProfile profile) {
  ValidationReport report;
  report.record_count = records.size();
  std::map<std::string, std::vector<const DialogTurnRecord*>> conversations;
  for (const auto& r : records) conversations[r.conversation_id].push_back(&r);

  for (const auto& [id, turns] : conversations) {
    std::vector<int> numbers;
    for (const auto* t : turns) numbers.push_back(t->turn_no);
    std::sort(numbers.begin(), numbers.end());
    std::set<int> seen;
    for (int n : numbers) {
      if (!seen.insert(n).second) {
        report.violations.push_back({"duplicate-turn", id + "#" + std::to_string(n), "turn number repeated"});
      }
    }
    const auto distinct = std::vector<int>(seen.begin(), seen.end());
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      if (distinct[i] != static_cast<int>(i) + 1) {
        report.violations.push_back({"numbering", id,
                                     "turn numbers are not contiguous from 1 (expected " + std::to_string(i + 1) +
                                         ", found " + std::to_string(distinct[i]) + ")"});
        break;
      }
    }

    if (profile == DatasetProfile::InternalMedia) {
      if (turns.size() != kTurnsPerConversation) {
        report.violations.push_back({"turn-count", id,
                                     "conversation has " + std::to_string(turns.size()) + " turns, expected " +
                                         std::to_string(kTurnsPerConversation)});
      }
      for (const auto* t : turns) {
        const auto locator = id + "#" + std::to_string(t->turn_no);
        for (const auto& [name, value] : {std::pair{"answer", &t->answer}, std::pair{"paraphrase", &t->paraphrase}}) {
          if (!*value) continue;
          const auto words = word_count(**value);
          if (words > kMaxResponseWords) {
            report.violations.push_back({"length-bound", locator,
                                         std::string(name) + " has " + std::to_string(words) + " words, limit " +
                                             std::to_string(kMaxResponseWords)});
          }
        }
      }
    } else {
      for (const auto* t : turns) {
        if (trim(t->rewrite).empty()) {
          report.violations.push_back({"rewrite-missing", id + "#" + std::to_string(t->turn_no), "rewrite is empty"});
        }
      }
    }
  }
  return report;
}

RouterTrainingSet derive_router_training(const std::vector<DialogTurnRecord>& records) {
  RouterTrainingSet set;
  for (const auto& r : records) {
    if (r.is_factual) set.questions.push_back({r.rewrite, *r.is_factual});
    else ++set.skipped;
  }
  if (set.questions.empty()) throw InvalidInput("no record carries an is_factual label");
  return set;
}

}  // namespace led
