#include "led/evaluation_run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

using nlohmann::json;

std::vector<std::string> ranked_urls(const Engine& engine, const Utterance& query, std::size_t k) {
  std::vector<std::string> urls;
  const auto* index = engine.index();
  if (!index) return urls;
  for (const auto& hit : bm25_search(*index, query, std::max(k, engine.config().top_k))) {
    const auto& url = index->passages()[hit.ordinal].url;
    if (std::find(urls.begin(), urls.end(), url) == urls.end()) urls.push_back(url);
  }
  return urls;
}

// Per-token log-probabilities of `target` after `prompt`, closed by the
// end-of-sequence token. Empty when a target word is out of vocabulary.
std::optional<PplRecord> score_reference(const LmBackend& lm, const std::vector<std::string>& prompt_tokens,
                                         const std::vector<std::string>& target_tokens) {
  const auto& vocab = lm.vocabulary();
  std::vector<TokenId> target;
  for (const auto& t : target_tokens) {
    const auto it = std::find(vocab.begin(), vocab.end(), t);
    if (it == vocab.end()) return std::nullopt;
    target.push_back(static_cast<TokenId>(it - vocab.begin()));
  }
  target.push_back(lm.eos());
  auto prefix = encode_tokens(lm, prompt_tokens);
  PplRecord record;
  for (const auto id : target) {
    const auto probs = lm.next_distribution(prefix);
    if (id >= probs.size() || !(probs[id] > 0.0)) return std::nullopt;
    record.log_probs.push_back(std::log(probs[id]));
    prefix.push_back(id);
  }
  return record;
}

std::string fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

}  // namespace

std::set<std::string> parse_metric_selection(const std::string& list) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string::npos) comma = list.size();
    const auto name = std::string(trim(std::string_view(list).substr(pos, comma - pos)));
    pos = comma + 1;
    if (name.empty()) continue;
    if (name == "all") {
      out.insert(kEvalMetrics.begin(), kEvalMetrics.end());
    } else if (kEvalMetrics.count(name)) {
      out.insert(name);
    } else {
      throw InvalidInput("unknown metric \"" + name + "\"");
    }
  }
  if (out.empty()) throw InvalidInput("no metrics selected");
  return out;
}

const MetricValue* EvalReport::find(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

json EvalReport::to_json() const {
  json m = json::object();
  for (const auto& v : metrics) m[v.name] = {{"value", v.value}, {"count", v.count}};
  json t = json::array();
  std::map<std::string, std::size_t> routes;
  for (const auto& turn : turns) {
    ++routes[std::string(to_string(turn.route))];
    if (turn.fell_through) ++routes["fell_through"];
    t.push_back({{"conversation_id", turn.conversation_id},
                 {"turn_no", turn.turn_no},
                 {"rewritten", turn.rewritten},
                 {"route", std::string(to_string(turn.route))},
                 {"fell_through", turn.fell_through},
                 {"response", turn.response},
                 {"answer_span", turn.answer_span ? json(*turn.answer_span) : json(nullptr)},
                 {"ranked_urls", turn.ranked_urls}});
  }
  return {{"records", records}, {"conversations", conversations}, {"metrics", m},
          {"warnings", warnings}, {"routes", routes},               {"turns", t}};
}

std::string EvalReport::table() const {
  std::string out = "metric          value     n\n";
  out += "--------------  --------  -----\n";
  for (const auto& m : metrics) {
    char line[128];
    std::snprintf(line, sizeof line, "%-14s  %8s  %5zu\n", m.name.c_str(), fixed(m.value).c_str(), m.count);
    out += line;
  }
  for (const auto& w : warnings) out += "warning: " + w + "\n";
  return out;
}

EvalReport run_evaluation(const Engine& engine, const std::vector<DialogTurnRecord>& records,
                          const EvalOptions& options) {
  if (records.empty()) throw InvalidInput("dataset is empty");
  if (options.recall_k == 0) throw InvalidInput("recall k must be at least 1");

  std::map<std::string, std::vector<const DialogTurnRecord*>> conversations;
  std::vector<std::string> order;
  for (const auto& r : records) {
    auto& turns = conversations[r.conversation_id];
    if (turns.empty()) order.push_back(r.conversation_id);
    turns.push_back(&r);
  }

  EvalReport report;
  report.records = records.size();
  report.conversations = conversations.size();
  const auto wants = [&](const char* name) { return options.metrics.count(name) > 0; };

  std::vector<std::pair<const DialogTurnRecord*, std::size_t>> scored;  // record, index into report.turns
  for (const auto& id : order) {
    auto turns = conversations[id];
    std::stable_sort(turns.begin(), turns.end(),
                     [](const DialogTurnRecord* a, const DialogTurnRecord* b) { return a->turn_no < b->turn_no; });
    auto state = engine.new_session(id);
    for (const auto* record : turns) {
      const auto result = engine.process_turn(state, record->question);
      EvalTurn t;
      t.conversation_id = id;
      t.turn_no = record->turn_no;
      t.rewritten = result.turn.rewritten.text();
      t.route = result.turn.route;
      t.fell_through = result.trace.fell_through;
      t.response = result.response;
      if (result.trace.span) t.answer_span = result.trace.span->text;
      if (record->answer_url) t.ranked_urls = ranked_urls(engine, result.turn.rewritten, options.recall_k);
      scored.emplace_back(record, report.turns.size());
      report.turns.push_back(std::move(t));
    }
  }

  if (wants("rouge")) {
    double r1 = 0.0, rl = 0.0;
    for (const auto& [record, i] : scored) {
      const auto r = rouge(report.turns[i].rewritten, record->rewrite);
      r1 += r.rouge1;
      rl += r.rougeL;
    }
    const double n = static_cast<double>(scored.size());
    report.metrics.push_back({"rouge1", r1 / n, scored.size()});
    report.metrics.push_back({"rougeL", rl / n, scored.size()});
  }

  if (wants("f1") || wants("em")) {
    double f1 = 0.0, em = 0.0;
    std::size_t n = 0;
    for (const auto& [record, i] : scored) {
      if (!record->answer) continue;
      const auto prediction = report.turns[i].answer_span.value_or("");
      f1 += token_f1(prediction, *record->answer);
      em += exact_match(prediction, *record->answer) ? 1.0 : 0.0;
      ++n;
    }
    if (n == 0) {
      report.warnings.push_back("f1/em skipped: no record carries a gold answer");
    } else {
      if (wants("f1")) report.metrics.push_back({"f1", f1 / static_cast<double>(n), n});
      if (wants("em")) report.metrics.push_back({"em", em / static_cast<double>(n), n});
    }
  }

  if (wants("recall") || wants("mrr")) {
    std::vector<RankJudgment> judgments;
    for (const auto& [record, i] : scored) {
      if (record->answer_url) judgments.push_back({report.turns[i].ranked_urls, {*record->answer_url}});
    }
    if (!engine.index()) {
      report.warnings.push_back("recall/mrr skipped: no passage index configured");
    } else if (judgments.empty()) {
      report.warnings.push_back("recall/mrr skipped: no record carries a gold answer_url");
    } else {
      if (wants("recall")) {
        report.metrics.push_back(
            {"recall@" + std::to_string(options.recall_k), recall_at_k(judgments, options.recall_k), judgments.size()});
      }
      if (wants("mrr")) report.metrics.push_back({"mrr", mrr(judgments), judgments.size()});
    }
  }

  if (wants("perplexity")) {
    const auto* lm = engine.language_model();
    if (!lm) {
      report.warnings.push_back("perplexity skipped: no language-model backend configured");
    } else {
      std::vector<PplRecord> ppl;
      std::size_t oov = 0;
      for (const auto& [record, i] : scored) {
        const auto& gold = record->paraphrase ? record->paraphrase : record->answer;
        if (!gold) continue;
        auto scored_record = score_reference(*lm, tokenize(report.turns[i].rewritten), tokenize(*gold));
        if (scored_record) {
          ppl.push_back(std::move(*scored_record));
        } else {
          ++oov;
        }
      }
      if (oov) report.warnings.push_back("perplexity: skipped " + std::to_string(oov) +
                                         " references with out-of-vocabulary or zero-probability tokens");
      if (ppl.empty()) {
        report.warnings.push_back("perplexity skipped: no scorable reference responses");
      } else {
        report.metrics.push_back({"perplexity", perplexity(ppl), ppl.size()});
      }
    }
  }

  if (wants("ssa")) {
    if (options.ssa_labels.empty()) {
      report.warnings.push_back("ssa skipped: no labels file given");
    } else {
      const auto s = ssa(options.ssa_labels);
      const auto n = options.ssa_labels.size();
      report.metrics.push_back({"sensibleness", s.sensibleness_rounded, n});
      report.metrics.push_back({"specificity", s.specificity_rounded, n});
      report.metrics.push_back({"ssa", s.ssa_rounded, n});
    }
  }
  return report;
}

}  // namespace led
