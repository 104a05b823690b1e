#include "led/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "jsonl.hpp"
#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

std::map<std::string, int> counts(const std::vector<std::string>& tokens) {
  std::map<std::string, int> out;
  for (const auto& t : tokens) ++out[t];
  return out;
}

std::size_t multiset_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto ca = counts(a);
  const auto cb = counts(b);
  std::size_t common = 0;
  for (const auto& [tok, n] : ca) {
    const auto it = cb.find(tok);
    if (it != cb.end()) common += static_cast<std::size_t>(std::min(n, it->second));
  }
  return common;
}

// Shared empty-input convention: both empty -> 1, one empty -> 0.
std::optional<double> empty_case(std::size_t pred, std::size_t gold) {
  if (pred == 0 && gold == 0) return 1.0;
  if (pred == 0 || gold == 0) return 0.0;
  return std::nullopt;
}

double f1(std::size_t overlap, std::size_t pred, std::size_t gold) {
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(pred);
  const double r = static_cast<double>(overlap) / static_cast<double>(gold);
  return 2.0 * p * r / (p + r);
}

bool read_flag(const nlohmann::json& rec, const char* field) {
  const auto it = rec.find(field);
  if (it == rec.end()) throw InvalidInput(std::string("missing required field \"") + field + "\"");
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number_integer() && (it->get<int>() == 0 || it->get<int>() == 1)) return it->get<int>() == 1;
  throw InvalidInput(std::string("field \"") + field + "\" must be 0 or 1");
}

std::string field_as_string(const nlohmann::json& rec, const char* field) {
  const auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

}  // namespace

double perplexity(const std::vector<PplRecord>& records) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& r : records) {
    for (double lp : r.log_probs) {
      if (!std::isfinite(lp) || lp > 0.0) throw InvalidInput("log-probabilities must be finite and <= 0");
      total += lp;
    }
    tokens += r.log_probs.size();
  }
  if (tokens == 0) throw InvalidInput("perplexity needs at least one token");
  return std::exp(-total / static_cast<double>(tokens));
}

void validate_ssa_label(const SsaLabel& label) {
  if (label.specific && !label.sensible) {
    throw InvalidInput("SSA label for turn " + label.turn + " is specific but not sensible");
  }
}

double round_half_up(double value, int decimals) {
  if (!std::isfinite(value)) return value;
  // Snap away binary noise (86.16499999999999 -> 86.165) before rounding.
  const double snapped = std::round(value * 1e9) / 1e9;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::fabs(snapped), std::chars_format::fixed);
  std::string digits(buf, res.ptr);
  const auto dot = digits.find('.');
  std::string int_part = dot == std::string::npos ? digits : digits.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : digits.substr(dot + 1);
  frac.resize(static_cast<std::size_t>(decimals) + 1, '0');
  const bool round_up = frac.back() >= '5';
  frac.pop_back();
  std::string number = int_part + frac;
  if (round_up) {
    int i = static_cast<int>(number.size()) - 1;
    while (i >= 0 && number[static_cast<std::size_t>(i)] == '9') number[static_cast<std::size_t>(i--)] = '0';
    if (i < 0) number.insert(number.begin(), '1');
    else ++number[static_cast<std::size_t>(i)];
  }
  const auto split = number.size() - static_cast<std::size_t>(decimals);
  const std::string text = number.substr(0, split) + "." + number.substr(split);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return value < 0 ? -out : out;
}

SsaScores ssa_from_rates(double sensibleness, double specificity) {
  SsaScores s;
  s.sensibleness = sensibleness;
  s.specificity = specificity;
  s.ssa = (sensibleness + specificity) / 2.0;
  s.sensibleness_rounded = round_half_up(s.sensibleness);
  s.specificity_rounded = round_half_up(s.specificity);
  s.ssa_rounded = round_half_up(s.ssa);
  return s;
}

SsaScores ssa(const std::vector<SsaLabel>& labels) {
  if (labels.empty()) throw InvalidInput("SSA needs at least one label");
  std::size_t sensible = 0, specific = 0;
  for (const auto& l : labels) {
    validate_ssa_label(l);
    sensible += l.sensible ? 1 : 0;
    specific += l.specific ? 1 : 0;
  }
  const double n = static_cast<double>(labels.size());
  return ssa_from_rates(100.0 * static_cast<double>(sensible) / n, 100.0 * static_cast<double>(specific) / n);
}

std::vector<SsaLabel> load_ssa_labels(const std::filesystem::path& path) {
  std::vector<SsaLabel> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t) {
    SsaLabel label{field_as_string(rec, "turn"), field_as_string(rec, "annotator"), read_flag(rec, "sensible"),
                   read_flag(rec, "specific")};
    validate_ssa_label(label);
    out.push_back(std::move(label));
  });
  return out;
}

double recall_at_k(const std::vector<RankJudgment>& judgments, std::size_t k) {
  if (k == 0) throw InvalidInput("k must be at least 1");
  if (judgments.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& j : judgments) {
    const auto limit = std::min(k, j.ranked.size());
    const bool hit = std::any_of(j.ranked.begin(), j.ranked.begin() + static_cast<std::ptrdiff_t>(limit),
                                 [&](const auto& id) { return j.relevant.contains(id); });
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(judgments.size());
}

double mrr(const std::vector<RankJudgment>& judgments) {
  if (judgments.empty()) return 0.0;
  double total = 0.0;
  for (const auto& j : judgments) {
    for (std::size_t r = 0; r < j.ranked.size(); ++r) {
      if (j.relevant.contains(j.ranked[r])) {
        total += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(judgments.size());
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto p = tokenize(prediction);
  const auto g = tokenize(gold);
  if (const auto e = empty_case(p.size(), g.size())) return *e;
  return f1(multiset_overlap(p, g), p.size(), g.size());
}

bool exact_match(std::string_view prediction, std::string_view gold) { return tokenize(prediction) == tokenize(gold); }

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScores rouge(std::string_view prediction, std::string_view gold) {
  const auto p = tokenize(prediction);
  const auto g = tokenize(gold);
  if (const auto e = empty_case(p.size(), g.size())) return {*e, *e};
  return {f1(multiset_overlap(p, g), p.size(), g.size()), f1(lcs_length(p, g), p.size(), g.size())};
}

}  // namespace led
