#pragma once

// Evaluation metrics: perplexity, SSA, ROUGE-1/ROUGE-L, Recall@k, MRR,
// token F1 and exact match.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace led {

/// Natural-log token probabilities of one sequence; every entry <= 0.
struct PplRecord {
  std::vector<double> log_probs;
};

/// Corpus-level perplexity exp(-sum(log p) / tokens). Throws InvalidInput
/// with no tokens or a positive/non-finite log-probability.
double perplexity(const std::vector<PplRecord>& records);

struct SsaLabel {
  std::string turn;
  std::string annotator;
  bool sensible = false;
  bool specific = false;
};

/// Throws InvalidInput for a label that is specific but not sensible.
void validate_ssa_label(const SsaLabel& label);

struct SsaScores {
  double sensibleness = 0.0;  // percentages
  double specificity = 0.0;
  double ssa = 0.0;
  // Half-up rounding to two decimals, as reported.
  double sensibleness_rounded = 0.0;
  double specificity_rounded = 0.0;
  double ssa_rounded = 0.0;
};

/// Rates are percentages in [0, 100].
SsaScores ssa_from_rates(double sensibleness, double specificity);
SsaScores ssa(const std::vector<SsaLabel>& labels);

/// Rounds half away from zero at the given number of decimals, using the
/// shortest decimal representation of `value` so 86.165 rounds to 86.17.
double round_half_up(double value, int decimals = 2);

/// JSONL `{"turn", "annotator", "sensible": 0|1, "specific": 0|1}`.
std::vector<SsaLabel> load_ssa_labels(const std::filesystem::path& path);

struct RankJudgment {
  std::vector<std::string> ranked;
  std::set<std::string> relevant;
};

double recall_at_k(const std::vector<RankJudgment>& judgments, std::size_t k);
double mrr(const std::vector<RankJudgment>& judgments);

double token_f1(std::string_view prediction, std::string_view gold);
bool exact_match(std::string_view prediction, std::string_view gold);

struct RougeScores {
  double rouge1 = 0.0;
  double rougeL = 0.0;
};

RougeScores rouge(std::string_view prediction, std::string_view gold);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Optional external sentence-similarity scorer (for embedding metrics).
using SimilarityScorer = std::function<double(std::string_view, std::string_view)>;

}  // namespace led
