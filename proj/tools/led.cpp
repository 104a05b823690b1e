// led: command line front end for indexing, chatting, serving, evaluation,
// router training and dataset validation.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>

#include "led/chat_loop.hpp"
#include "led/config.hpp"
#include "led/data.hpp"
#include "led/errors.hpp"
#include "led/evaluation_run.hpp"
#include "led/knowledge.hpp"
#include "led/pipeline.hpp"
#include "led/router.hpp"
#include "led/server.hpp"
#include "led/session_store.hpp"

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitError = 2;

led::PipelineConfig config_or_defaults(const std::string& path) {
  if (!path.empty()) return led::load_config(path);
  return led::parse_config(nlohmann::json::object(), std::filesystem::current_path(), led::led_environment());
}

led::PipelineConfig require_config(const std::string& path) {
  if (path.empty()) throw led::InvalidInput("--config is required for this command");
  return led::load_config(path);
}

template <typename T>
T pick(const std::optional<T>& flag, const T& fallback) {
  return flag ? *flag : fallback;
}

std::filesystem::path require_path(const std::string& flag, const std::optional<std::filesystem::path>& fallback,
                                   const char* what) {
  if (!flag.empty()) return flag;
  if (fallback) return *fallback;
  throw led::InvalidInput(std::string("no ") + what + " given and none configured");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw led::ResourceError("cannot write " + path.string());
  out << text;
}

int cmd_index(const std::string& config_path, const std::string& corpus_flag, const std::string& out_flag,
              const std::optional<double>& k1, const std::optional<double>& b) {
  const auto config = config_or_defaults(config_path);
  const auto corpus = require_path(corpus_flag, config.resources.corpus, "corpus");
  const auto out = require_path(out_flag, config.resources.index, "output path");
  const led::Bm25Params params{pick(k1, config.bm25.k1), pick(b, config.bm25.b)};
  const auto index = led::PassageIndex::build(led::load_corpus(corpus), params);
  index.save(out);
  std::cout << "indexed " << index.size() << " passages, " << index.postings().size() << " terms -> " << out.string()
            << "\n";
  return 0;
}

int cmd_chat(const std::string& config_path, bool trace) {
  auto config = require_config(config_path);
  auto settings = config.server;
  settings.session_log.reset();  // interactive sessions are not persisted
  auto engine = std::make_shared<const led::Engine>(std::move(config));
  led::ChatService service(engine, settings);
  led::ChatLoopOptions options;
  options.trace = trace;
  options.prompt = isatty(STDIN_FILENO) != 0;
  led::run_chat_loop(service, std::cin, std::cout, options);
  return 0;
}

int cmd_serve(const std::string& config_path, const std::string& host, int port) {
  auto config = require_config(config_path);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  led::ChatServer server(config.server);
  const int bound = server.bind(host, port);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  server.load_async([config] { return std::make_shared<const led::Engine>(config); });

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  // listen() also returns if the socket fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& dataset, const std::string& metrics, std::size_t k,
             const std::string& labels, const std::string& json_out, const std::string& table_out) {
  auto config = require_config(config_path);
  const auto records = led::load_dialog_dataset(dataset);
  led::EvalOptions options;
  options.metrics = led::parse_metric_selection(metrics);
  options.recall_k = k;
  if (!labels.empty()) {
    options.ssa_labels = led::load_ssa_labels(labels);
    options.metrics.insert("ssa");
  }
  const led::Engine engine(std::move(config));
  const auto report = led::run_evaluation(engine, records, options);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const auto table = report.table();
  std::cout << table;
  if (!table_out.empty()) write_text(table_out, table);
  if (!json_out.empty()) write_text(json_out, report.to_json().dump(2) + "\n");
  return 0;
}

int cmd_train_router(const std::string& config_path, const std::string& data, const std::string& dataset,
                     const std::string& out_flag, const std::optional<int>& epochs, const std::optional<double>& lr,
                     const std::optional<std::uint32_t>& dim, const std::optional<std::uint64_t>& seed) {
  const auto config = config_or_defaults(config_path);
  std::vector<led::LabeledQuestion> questions;
  if (!dataset.empty()) {
    auto derived = led::derive_router_training(led::load_dialog_dataset(dataset));
    if (derived.skipped) std::cerr << "skipped " << derived.skipped << " unlabeled records\n";
    questions = std::move(derived.questions);
  } else {
    questions = led::load_labeled_questions(require_path(data, config.resources.router_training, "training data"));
  }
  const auto out = require_path(out_flag, config.resources.router_model, "output path");
  led::TrainOptions options = config.router_training;
  options.epochs = pick(epochs, options.epochs);
  options.learning_rate = pick(lr, options.learning_rate);
  options.dim = pick(dim, options.dim);
  options.seed = pick(seed, options.seed);
  const auto model = led::train_router(questions, options);
  led::save_router_model(model, out);
  std::cout << "trained on " << questions.size() << " questions, training F1 "
            << led::eval_router_f1(model, questions, config.router) << " -> " << out.string() << "\n";
  return 0;
}

int cmd_validate(const std::string& dataset, const std::string& profile_name) {
  const auto profile = led::profile_from_string(profile_name);
  const auto records = led::load_dialog_dataset(dataset);
  const auto report = led::validate_dataset(records, profile);
  std::cout << report.record_count << " records, " << report.violations.size() << " violations\n";
  for (const auto& v : report.violations) std::cout << v.rule << "\t" << v.locator << "\t" << v.message << "\n";
  return report.ok() ? 0 : kExitViolations;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversational pipeline engine"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "Engine config file (JSON); LED_<SECTION>_<KEY> overrides any value");

  auto* index = app.add_subcommand("index", "Build a BM25 passage index from a JSONL corpus");
  std::string corpus, index_out;
  std::optional<double> k1, b;
  index->add_option("--corpus", corpus, "Corpus JSONL (default: resources.corpus)");
  index->add_option("--out,-o", index_out, "Index file to write (default: resources.index)");
  index->add_option("--k1", k1, "BM25 term-frequency saturation");
  index->add_option("--b", b, "BM25 length normalization");

  auto* chat = app.add_subcommand("chat", "Chat on stdin/stdout (/trace, /reset, /quit)");
  bool trace = false;
  chat->add_flag("--trace", trace, "Start with trace output on");

  auto* serve = app.add_subcommand("serve", "Run the HTTP chat service");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Run the pipeline over a dataset and report metrics");
  std::string eval_dataset, metrics = "rouge,f1,em,recall,mrr,perplexity", labels, json_out, table_out;
  std::size_t recall_k = 10;
  eval->add_option("--dataset", eval_dataset, "Dialog dataset JSONL")->required();
  eval->add_option("--metrics", metrics, "Comma-separated: rouge,f1,em,recall,mrr,perplexity,ssa or all")
      ->capture_default_str();
  eval->add_option("--k", recall_k, "Cutoff for recall@k")->capture_default_str();
  eval->add_option("--labels", labels, "SSA labels JSONL");
  eval->add_option("--json", json_out, "Write the machine-readable report here");
  eval->add_option("--table", table_out, "Write the table report here");

  auto* train = app.add_subcommand("train-router", "Train the factual/subjective classifier");
  std::string train_data, train_dataset, model_out;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::uint32_t> dim;
  std::optional<std::uint64_t> seed;
  train->add_option("--data", train_data, "Labeled questions JSONL (default: resources.router_training)");
  train->add_option("--from-dataset", train_dataset, "Derive labels from a dialog dataset's is_factual field");
  train->add_option("--out,-o", model_out, "Model file to write (default: resources.router_model)");
  train->add_option("--epochs", epochs);
  train->add_option("--lr", lr, "Initial learning rate");
  train->add_option("--dim", dim, "Hashed feature dimension (power of two)");
  train->add_option("--seed", seed);

  auto* validate = app.add_subcommand("validate-data", "Check a dialog dataset against a profile");
  std::string validate_dataset, profile = "internal-media";
  validate->add_option("--dataset", validate_dataset, "Dialog dataset JSONL")->required();
  validate->add_option("--profile", profile, "qrecc | internal-media")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) return cmd_index(config_path, corpus, index_out, k1, b);
    if (*chat) return cmd_chat(config_path, trace);
    if (*serve) return cmd_serve(config_path, host, port);
    if (*eval) return cmd_eval(config_path, eval_dataset, metrics, recall_k, labels, json_out, table_out);
    if (*train) return cmd_train_router(config_path, train_data, train_dataset, model_out, epochs, lr, dim, seed);
    if (*validate) return cmd_validate(validate_dataset, profile);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
