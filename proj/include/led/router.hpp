#pragma once

// Factual classifier: hashed unigram/bigram logistic regression that scores
// how likely a rewritten question needs external knowledge, plus threshold
// routing.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "led/core.hpp"

namespace led {

inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 18;
inline constexpr double kDefaultFactualThreshold = 0.8;

struct RouterModel {
  std::uint32_t dim = kDefaultFeatureDim;  // power of two
  std::uint64_t hash_seed = 0;
  double bias = 0.0;
  std::vector<float> weights;

  /// All-zero model of the given dimension; scores every input at 0.5.
  static RouterModel zeros(std::uint32_t dim = kDefaultFeatureDim, std::uint64_t hash_seed = 0);

  friend bool operator==(const RouterModel&, const RouterModel&) = default;
};

struct RouterConfig {
  double threshold = kDefaultFactualThreshold;
};

struct LabeledQuestion {
  std::string text;
  int label = 0;  // 1 = factual

  friend bool operator==(const LabeledQuestion&, const LabeledQuestion&) = default;
};

struct TrainOptions {
  int epochs = 5;
  double learning_rate = 0.1;  // decayed as lr / sqrt(step)
  std::uint32_t dim = kDefaultFeatureDim;
  std::uint64_t seed = 0;
};

/// Sorted, de-duplicated indices of the active hashed features.
std::vector<std::uint32_t> featurize(std::string_view text, std::uint32_t dim, std::uint64_t hash_seed);

double score_factual(const RouterModel& model, std::string_view text);

/// Factual iff score >= threshold.
Route route(double score, const RouterConfig& config);

/// Throws InvalidInput on empty or single-class data.
RouterModel train_router(const std::vector<LabeledQuestion>& data, const TrainOptions& options = {});

/// Binary F1 with factual as the positive class.
double eval_router_f1(const RouterModel& model, const std::vector<LabeledQuestion>& data,
                      const RouterConfig& config = {});

/// F1 from confusion counts; 0 when there are no true positives.
double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

// Model file: "LEDR" magic, u32 version, u32 dim, u64 seed, f64 bias, then
// dim little-endian f32 weights.
void save_router_model(const RouterModel& model, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_router_model(const RouterModel& model);
RouterModel load_router_model(const std::filesystem::path& path);
RouterModel decode_router_model(const std::vector<std::uint8_t>& bytes);

/// JSONL `{"text": ..., "label": 0|1}`.
std::vector<LabeledQuestion> load_labeled_questions(const std::filesystem::path& path);

}  // namespace led
