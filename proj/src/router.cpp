#include "led/router.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "byteio.hpp"
#include "jsonl.hpp"
#include "led/errors.hpp"
#include "led/text.hpp"

namespace led {
namespace {

constexpr std::string_view kMagic = "LEDR";
constexpr std::uint32_t kVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t feature_hash(std::string_view feature, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : feature) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

void require_power_of_two(std::uint32_t dim) {
  if (dim == 0 || !std::has_single_bit(dim)) throw InvalidInput("feature dimension must be a power of two");
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double margin(const RouterModel& model, const std::vector<std::uint32_t>& features) {
  double z = model.bias;
  for (auto f : features) z += model.weights[f];
  return z;
}

// Uniform integer in [0, bound) by rejection, so shuffles are identical on
// every standard library.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

RouterModel RouterModel::zeros(std::uint32_t dim, std::uint64_t hash_seed) {
  require_power_of_two(dim);
  return RouterModel{dim, hash_seed, 0.0, std::vector<float>(dim, 0.0f)};
}

std::vector<std::uint32_t> featurize(std::string_view text, std::uint32_t dim, std::uint64_t hash_seed) {
  require_power_of_two(dim);
  const auto tokens = tokenize(text);
  std::vector<std::uint32_t> out;
  const auto mask = static_cast<std::uint64_t>(dim - 1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(static_cast<std::uint32_t>(feature_hash("u:" + tokens[i], hash_seed) & mask));
    if (i + 1 < tokens.size()) {
      out.push_back(static_cast<std::uint32_t>(feature_hash("b:" + tokens[i] + " " + tokens[i + 1], hash_seed) & mask));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double score_factual(const RouterModel& model, std::string_view text) {
  return logistic(margin(model, featurize(text, model.dim, model.hash_seed)));
}

Route route(double score, const RouterConfig& config) {
  return score >= config.threshold ? Route::Factual : Route::Subjective;
}

RouterModel train_router(const std::vector<LabeledQuestion>& data, const TrainOptions& options) {
  if (data.empty()) throw InvalidInput("router training data is empty");
  const bool has_pos = std::any_of(data.begin(), data.end(), [](const auto& q) { return q.label == 1; });
  const bool has_neg = std::any_of(data.begin(), data.end(), [](const auto& q) { return q.label == 0; });
  if (!has_pos || !has_neg) throw InvalidInput("router training data must contain both labels");
  for (const auto& q : data) {
    if (q.label != 0 && q.label != 1) throw InvalidInput("router label must be 0 or 1");
  }
  if (options.epochs < 1 || !(options.learning_rate > 0)) throw InvalidInput("invalid training options");

  auto model = RouterModel::zeros(options.dim, options.seed);
  std::vector<std::vector<std::uint32_t>> features;
  features.reserve(data.size());
  for (const auto& q : data) features.push_back(featurize(q.text, model.dim, model.hash_seed));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);
    for (auto idx : order) {
      ++step;
      const double lr = options.learning_rate / std::sqrt(static_cast<double>(step));
      const double p = logistic(margin(model, features[idx]));
      const double gradient = p - static_cast<double>(data[idx].label);
      for (auto f : features[idx]) {
        model.weights[f] = static_cast<float>(model.weights[f] - lr * gradient);
      }
      model.bias -= lr * gradient;
    }
  }
  return model;
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

double eval_router_f1(const RouterModel& model, const std::vector<LabeledQuestion>& data, const RouterConfig& config) {
  if (data.empty()) throw InvalidInput("router evaluation data is empty");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& q : data) {
    const bool predicted = route(score_factual(model, q.text), config) == Route::Factual;
    if (predicted && q.label == 1) ++tp;
    else if (predicted) ++fp;
    else if (q.label == 1) ++fn;
  }
  return f1_from_counts(tp, fp, fn);
}

std::vector<std::uint8_t> encode_router_model(const RouterModel& model) {
  if (model.weights.size() != model.dim) throw InvalidInput("router weights do not match dimension");
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.uint<std::uint32_t>(kVersion);
  w.uint<std::uint32_t>(model.dim);
  w.uint<std::uint64_t>(model.hash_seed);
  w.f64(model.bias);
  for (float v : model.weights) w.f32(v);
  return w.take();
}

RouterModel decode_router_model(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "router model");
  r.expect(kMagic);
  const auto version = r.uint<std::uint32_t>();
  if (version != kVersion) throw InvalidInput("router model: unsupported version " + std::to_string(version));
  RouterModel model;
  model.dim = r.uint<std::uint32_t>();
  require_power_of_two(model.dim);
  model.hash_seed = r.uint<std::uint64_t>();
  model.bias = r.f64();
  model.weights.resize(model.dim);
  for (auto& v : model.weights) {
    v = r.f32();
    if (!std::isfinite(v)) throw InvalidInput("router model: non-finite weight");
  }
  if (!r.done()) throw InvalidInput("router model: trailing bytes");
  return model;
}

void save_router_model(const RouterModel& model, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_router_model(model));
}

RouterModel load_router_model(const std::filesystem::path& path) {
  return decode_router_model(detail::read_file_bytes(path));
}

std::vector<LabeledQuestion> load_labeled_questions(const std::filesystem::path& path) {
  std::vector<LabeledQuestion> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t) {
    auto text = detail::required_string(rec, "text");
    const auto it = rec.find("label");
    if (it == rec.end() || !it->is_number_integer()) throw InvalidInput("missing integer field \"label\"");
    const int label = it->get<int>();
    if (label != 0 && label != 1) throw InvalidInput("label must be 0 or 1");
    out.push_back({std::move(text), label});
  });
  return out;
}

}  // namespace led
