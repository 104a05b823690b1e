// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance                   run every criterion
//   acceptance --only 3,7        run a subset
//   acceptance --update-golden   rewrite the golden trace file and exit

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "led/chat_loop.hpp"
#include "led/config.hpp"
#include "led/data.hpp"
#include "led/eval.hpp"
#include "led/generator.hpp"
#include "led/knowledge.hpp"
#include "led/pipeline.hpp"
#include "led/router.hpp"
#include "led/safety.hpp"
#include "led/serialize.hpp"
#include "led/server.hpp"
#include "led/session_store.hpp"
#include "led/text.hpp"
#include "oracles.hpp"

namespace {

using nlohmann::json;

const std::string kFixtures = LED_FIXTURE_DIR;
const std::string kGolden = kFixtures + "/golden_trace.jsonl";

// Collects failures for one criterion; the first few are reported.
struct Outcome {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  std::string note;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<std::string> read_script() {
  std::ifstream in(kFixtures + "/script.txt");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!led::trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::shared_ptr<const led::Engine> fixture_engine() {
  static const auto engine = std::make_shared<const led::Engine>(led::load_config(kFixtures + "/config.json"));
  return engine;
}

// ---------------------------------------------------------------------------

void ssa_parity(Outcome& o) {
  const auto a = led::ssa_from_rates(72.60, 83.10);
  const auto b = led::ssa_from_rates(80.38, 91.95);
  o.expect(a.ssa_rounded == 77.85, "ssa(72.60, 83.10) = " + num(a.ssa_rounded, 17));
  o.expect(b.ssa_rounded == 86.17, "ssa(80.38, 91.95) = " + num(b.ssa_rounded, 17));
  o.note = "77.85, 86.17";
}

void bm25_oracle(Outcome& o) {
  std::mt19937_64 rng(20240601);
  std::vector<std::string> words;
  for (int i = 0; i < 60; ++i) words.push_back("t" + std::to_string(i));
  std::size_t queries = 0;
  constexpr int kCorpora = 200;
  for (int c = 0; c < kCorpora; ++c) {
    // A smaller vocabulary on some corpora forces heavy score ties.
    const std::size_t vocab = c % 3 == 0 ? 6 : words.size();
    const std::size_t n = 1 + rng() % 200;
    std::vector<led::Passage> passages;
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      const std::size_t len = 1 + rng() % 40;
      for (std::size_t j = 0; j < len; ++j) text += words[rng() % vocab] + " ";
      char id[16];
      std::snprintf(id, sizeof id, "d%03zu", (i * 7919) % 1000);  // ids not in insertion order
      passages.push_back(led::Passage::make(id, "", text));
      docs.emplace_back(id, led::tokenize(text));
    }
    const auto index = led::PassageIndex::build(passages);
    for (int q = 0; q < 5; ++q, ++queries) {
      std::vector<std::string> query;
      for (std::size_t j = 0, len = 1 + rng() % 5; j < len; ++j) query.push_back(words[rng() % (vocab + 2)]);
      const std::size_t k = 1 + rng() % 25;
      const auto got = index.search(query, k);
      const auto want = oracle::brute_force_bm25(docs, query, k);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].passage_id == want[i].id && std::abs(got[i].bm25 - want[i].score) <= 1e-9;
      }
      o.expect(same, "corpus " + std::to_string(c) + " query " + std::to_string(q) + " differs from brute force");
    }
  }
  o.note = std::to_string(kCorpora) + " corpora, " + std::to_string(queries) + " queries";
}

led::DecodeConfig beam_config(int width, int max_len) {
  led::DecodeConfig c;
  c.mode = led::DecodeMode::Beam;
  c.beam_width = width;
  c.max_len = max_len;
  return c;
}

void beam_optimality(Outcome& o) {
  // 16 (vocab, max_len) shapes; rare non-monotone cases need a large family
  // to show up at all.
  constexpr int kTrialsPerShape = 3125;
  std::mt19937_64 rng(7);
  std::size_t backends = 0, monotone_violations = 0, affected_backends = 0;
  std::string first_violation;
  for (std::size_t vocab = 2; vocab <= 5; ++vocab) {
    for (int max_len = 1; max_len <= 4; ++max_len) {
      for (int trial = 0; trial < kTrialsPerShape; ++trial, ++backends) {
        const double temperature = trial % 2 ? 1.0 : 0.5;
        const auto eos = static_cast<led::TokenId>(rng() % vocab);
        const oracle::RandomLm lm(vocab, eos, rng(), temperature);
        const std::vector<led::TokenId> prompt{static_cast<led::TokenId>(rng() % vocab)};
        const auto want = oracle::exhaustive_best(lm, prompt, max_len);
        const int full = static_cast<int>(std::pow(static_cast<double>(vocab), max_len));
        const auto got = led::beam_decode(lm, prompt, beam_config(full, max_len));
        o.expect(got.tokens == want.tokens && std::abs(got.log_prob - want.log_prob) <= 1e-12,
                 "full-width beam differs from exhaustive argmax (vocab " + std::to_string(vocab) + ", max_len " +
                     std::to_string(max_len) + ")");
        double prev = -INFINITY;
        bool affected = false;
        for (int width = 1; width <= 8; ++width) {
          const double lp = led::beam_decode(lm, prompt, beam_config(width, max_len)).log_prob;
          if (lp < prev - 1e-12) {
            ++monotone_violations;
            affected = true;
            if (first_violation.empty()) {
              first_violation = "vocab " + std::to_string(vocab) + " max_len " + std::to_string(max_len) +
                                ": width " + std::to_string(width) + " gives " + num(lp) + " < " + num(prev);
            }
          }
          prev = std::max(prev, lp);
        }
        affected_backends += affected;
      }
    }
  }
  o.expect(monotone_violations == 0, "beam-width monotonicity violated on " + std::to_string(affected_backends) +
                                         " backends (" + std::to_string(monotone_violations) +
                                         " width steps); first: " + first_violation);
  o.note = std::to_string(backends) + " backends, widths 1..8, " + std::to_string(affected_backends) +
           " non-monotone";
}

void decoding_degeneracies(Outcome& o) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const std::size_t vocab = 2 + rng() % 30;
    const oracle::RandomLm lm(vocab, static_cast<led::TokenId>(rng() % vocab), rng(), i % 2 ? 1.0 : 0.3);
    const std::vector<led::TokenId> prompt{static_cast<led::TokenId>(rng() % vocab)};
    const int max_len = 1 + static_cast<int>(rng() % 20);
    const auto greedy = led::greedy_decode(lm, prompt, max_len);
    o.expect(led::beam_decode(lm, prompt, beam_config(1, max_len)).tokens == greedy.tokens,
             "beam-1 differs from greedy on backend " + std::to_string(i));
    led::DecodeConfig topk;
    topk.mode = led::DecodeMode::TopK;
    topk.k = 1;
    topk.max_len = max_len;
    topk.seed = rng();
    o.expect(led::topk_decode(lm, prompt, topk).tokens == greedy.tokens,
             "top-1 differs from greedy on backend " + std::to_string(i));
  }
  o.note = "100 backends";
}

void perplexity_identities(Outcome& o) {
  std::mt19937_64 rng(5);
  for (std::size_t vocab : {2u, 4u, 7u, 50u, 1000u}) {
    const oracle::UniformLm lm(vocab, 0);
    std::vector<led::PplRecord> records;
    for (int r = 0; r < 20; ++r) {
      std::vector<led::TokenId> seq;
      for (std::size_t i = 0, n = 1 + rng() % 15; i < n; ++i) seq.push_back(static_cast<led::TokenId>(rng() % vocab));
      led::PplRecord rec;
      std::vector<led::TokenId> prefix;
      for (auto t : seq) {
        const std::vector<led::TokenId> one{t};
        rec.log_probs.push_back(led::sequence_logprob(lm, one, prefix));
        prefix.push_back(t);
      }
      records.push_back(std::move(rec));
    }
    const double ppl = led::perplexity(records);
    o.expect(std::abs(ppl - static_cast<double>(vocab)) <= 1e-9,
             "uniform perplexity " + num(ppl, 17) + " != " + std::to_string(vocab));
  }
  std::uniform_real_distribution<double> u(1e-4, 1.0);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> all;
    for (std::size_t i = 0, n = 1 + rng() % 200; i < n; ++i) all.push_back(std::log(u(rng)));
    const double whole = led::perplexity({{all}});
    std::vector<led::PplRecord> parts;
    for (std::size_t i = 0; i < all.size();) {
      const std::size_t len = 1 + rng() % 9;
      parts.push_back({std::vector<double>(all.begin() + i, all.begin() + std::min(all.size(), i + len))});
      i += len;
    }
    const double split = led::perplexity(parts);
    o.expect(std::abs(whole - split) <= 1e-9, "grouping changed perplexity: " + num(whole, 17) + " vs " + num(split, 17));
  }
  o.note = "5 vocabularies, 200 partitions";
}

void router_properties(Outcome& o) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double s1 = u(rng), s2 = u(rng), t1 = u(rng), t2 = u(rng);
    const auto factual = [](double s, double t) { return led::route(s, {t}) == led::Route::Factual; };
    o.expect(factual(s1, t1) == (s1 >= t1), "route disagrees with score >= threshold");
    if (s1 <= s2 && factual(s1, t1)) o.expect(factual(s2, t1), "raising the score left the factual route");
    if (t1 <= t2 && factual(s1, t2)) o.expect(factual(s1, t1), "lowering the threshold left the factual route");
  }

  std::vector<led::LabeledQuestion> toy;
  for (int i = 0; i < 50; ++i) {
    const auto x = "title" + std::to_string(i);
    toy.push_back({"when was " + x + " released", 1});
    toy.push_back({"do you like " + x, 0});
  }
  led::TrainOptions options;
  options.seed = 1234;
  const auto a = led::encode_router_model(led::train_router(toy, options));
  const auto b = led::encode_router_model(led::train_router(toy, options));
  o.expect(a == b, "training twice with one seed gave different model files");

  const auto model = led::train_router(toy, options);
  std::size_t correct = 0;
  for (const auto& q : toy) {
    const bool factual = led::route(led::score_factual(model, q.text), {}) == led::Route::Factual;
    correct += factual == (q.label == 1);
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(toy.size());
  const double f1 = led::eval_router_f1(model, toy);
  o.expect(accuracy == 1.0, "toy training accuracy " + num(accuracy));
  o.expect(f1 == 1.0, "toy router F1 " + num(f1));
  o.note = "accuracy " + num(accuracy) + ", F1 " + num(f1);
}

// Strings, booleans and nulls must match exactly; numbers within 1e-9.
bool json_close(const json& a, const json& b, std::string& where, const std::string& path = "") {
  if (a.is_number() && b.is_number()) {
    if (std::abs(a.get<double>() - b.get<double>()) <= 1e-9) return true;
    where = path + ": " + a.dump() + " vs " + b.dump();
    return false;
  }
  if (a.type() != b.type()) {
    where = path + ": type differs";
    return false;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) {
      where = path + ": key count differs";
      return false;
    }
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) {
        where = path + "." + it.key() + ": missing";
        return false;
      }
      if (!json_close(it.value(), b[it.key()], where, path + "." + it.key())) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      where = path + ": length differs";
      return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!json_close(a[i], b[i], where, path + "[" + std::to_string(i) + "]")) return false;
    }
    return true;
  }
  if (a != b) {
    where = path + ": " + a.dump() + " vs " + b.dump();
    return false;
  }
  return true;
}

std::vector<json> script_traces() {
  std::vector<json> out;
  for (const auto& r : led::run_script(*fixture_engine(), read_script())) out.push_back(led::to_json(r.trace, false));
  return out;
}

void golden_traces(Outcome& o) {
  const auto traces = script_traces();
  std::ifstream in(kGolden);
  o.expect(static_cast<bool>(in), "missing golden file " + kGolden);
  std::vector<json> golden;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) golden.push_back(json::parse(line));
  }
  o.expect(golden.size() == traces.size(), "golden has " + std::to_string(golden.size()) + " turns, run has " +
                                               std::to_string(traces.size()));
  for (std::size_t i = 0; i < std::min(golden.size(), traces.size()); ++i) {
    std::string where;
    o.expect(json_close(traces[i], golden[i], where), "turn " + std::to_string(i + 1) + where);
  }
  if (traces.size() >= 5) {
    const auto first_entity = std::string("Skyfall");
    o.expect(traces[0]["route"] == "factual", "turn 1 not answered on the factual route");
    o.expect(traces[1]["rewritten"].get<std::string>().find(first_entity) != std::string::npos,
             "turn 2 rewrite lacks the turn-1 entity: " + traces[1]["rewritten"].get<std::string>());
    o.expect(traces[4]["routed"] == "factual" && traces[4]["fell_through"] == true,
             "turn 5 did not fall through from the factual route");
    std::size_t fell = 0;
    for (const auto& t : traces) fell += t["fell_through"].get<bool>();
    o.expect(fell == 1, "expected exactly one fall-through turn, saw " + std::to_string(fell));
  }
  o.note = std::to_string(traces.size()) + " turns";
}

void safety_guarantees(Outcome& o) {
  const led::SafetyConfig config(led::SafetyConfig::load_blocklist(kFixtures + "/blocklist.txt"));
  const std::vector<std::string> words{"darn", "stupid", "idiot", "shut", "up", "hate", "you", "i", "like", "the",
                                       "movie", "not", "never", "great", "song", "darning", "upbeat", "hat"};
  led::ConversationState state;
  led::Turn prior;
  prior.user = led::Utterance("what do you think");
  prior.rewritten = prior.user;
  prior.response = "i like the movie";
  state.turns.push_back(prior);

  std::mt19937_64 rng(8);
  std::size_t fallbacks = 0;
  for (int round = 0; round < 10000; ++round) {
    std::vector<led::Candidate> cands;
    for (std::size_t i = 0, n = rng() % 5; i < n; ++i) {
      std::string text;
      for (std::size_t w = 0, len = 1 + rng() % 6; w < len; ++w) text += words[rng() % words.size()] + " ";
      cands.push_back({text, 1.0 - 0.1 * static_cast<double>(i), {}, {}});
    }
    const auto g = led::gate(cands, state, config);
    o.expect(!led::check_toxic(g.response, config), "emitted a blocklisted response: " + g.response);
    bool any_pass = false;
    for (const auto& c : g.candidates) any_pass = any_pass || c.verdict == led::Verdict::Pass;
    o.expect(g.fallback == !any_pass, "fallback flag disagrees with candidate verdicts");
    fallbacks += g.fallback;
  }

  std::ifstream in(kFixtures + "/contradiction_pairs.jsonl");
  std::size_t pairs = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto rec = json::parse(line);
    led::ConversationState s;
    led::Turn t = prior;
    t.response = rec["prior"].get<std::string>();
    s.turns.push_back(t);
    o.expect(led::check_inconsistent(rec["candidate"].get<std::string>(), s), "contradiction not flagged: " + line);
    ++pairs;
  }
  o.expect(pairs > 0, "no contradiction fixture pairs");
  o.note = "10000 sets, " + std::to_string(fallbacks) + " fallbacks, " + std::to_string(pairs) + " contradiction pairs";
}

void metric_hand_checks(Outcome& o) {
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  const double f1 = led::token_f1("november 14 2001", "released on november 14 2001");
  o.expect(close(f1, 0.75), "token_f1 = " + num(f1, 17));

  const auto ranked = [](std::size_t rank) {
    led::RankJudgment j;
    for (std::size_t i = 1; i <= 15; ++i) j.ranked.push_back("u" + std::to_string(i));
    j.relevant = {"u" + std::to_string(rank)};
    return j;
  };
  const double m = led::mrr({ranked(1), ranked(4)});
  o.expect(close(m, 0.625), "mrr = " + num(m, 17));
  const double r = led::recall_at_k({ranked(2), ranked(12)}, 10);
  o.expect(close(r, 0.5), "recall@10 = " + num(r, 17));
  const auto rg = led::rouge("a b c", "a x c");
  o.expect(close(rg.rouge1, 2.0 / 3.0), "rouge1 = " + num(rg.rouge1, 17));
  o.expect(close(rg.rougeL, 2.0 / 3.0), "rougeL = " + num(rg.rougeL, 17));

  const std::vector<std::string> words{"The", "film", "Skyfall", "2012", "song", "a", "an", "ADELE"};
  std::mt19937_64 rng(21);
  std::size_t matches = 0;
  for (int i = 0; i < 5000; ++i) {
    std::string a, b;
    for (std::size_t w = 0, n = rng() % 6; w < n; ++w) a += words[rng() % words.size()] + (rng() % 2 ? " " : ", ");
    if (rng() % 2) {
      b = a;
      for (auto& ch : b) ch = static_cast<char>(rng() % 2 ? std::tolower(ch) : std::toupper(ch));
    } else {
      for (std::size_t w = 0, n = rng() % 6; w < n; ++w) b += words[rng() % words.size()] + " ";
    }
    if (led::exact_match(a, b)) {
      ++matches;
      o.expect(led::token_f1(a, b) == 1.0, "exact match without f1 = 1: \"" + a + "\" / \"" + b + "\"");
    }
  }
  o.note = std::to_string(matches) + " fuzzed exact matches";
}

void dataset_validation(Outcome& o) {
  const auto profile = led::DatasetProfile::InternalMedia;
  const auto nine = led::validate_dataset(led::load_dialog_dataset(kFixtures + "/violation_turn_count.jsonl"), profile);
  o.expect(!nine.by_rule("turn-count").empty(), "9-turn conversation not reported");
  const auto longer = led::validate_dataset(led::load_dialog_dataset(kFixtures + "/violation_length.jsonl"), profile);
  o.expect(!longer.by_rule("length-bound").empty(), "31-word paraphrase not reported");
  const auto clean = led::validate_dataset(led::load_dialog_dataset(kFixtures + "/dialogs.jsonl"), profile);
  o.expect(clean.ok(), "conforming fixture reported " + std::to_string(clean.violations.size()) + " violations");
  o.note = "turn-count, length-bound, clean";
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string cli_transcript(const std::vector<std::string>& script, std::string& source) {
#ifdef LED_CLI_PATH
  const auto input = std::filesystem::temp_directory_path() / "led_acceptance_script.txt";
  {
    std::ofstream out(input);
    for (const auto& line : script) out << line << "\n";
  }
  const std::string command =
      std::string("\"") + LED_CLI_PATH + "\" --config \"" + kFixtures + "/config.json\" chat < \"" + input.string() + "\"";
  std::string output;
  if (FILE* pipe = popen(command.c_str(), "r")) {
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    pclose(pipe);
  }
  std::filesystem::remove(input);
  source = "led chat";
  return output;
#else
  led::ChatService service(fixture_engine(), {});
  std::ostringstream in_text;
  for (const auto& line : script) in_text << line << "\n";
  std::istringstream in(in_text.str());
  std::ostringstream out;
  led::run_chat_loop(service, in, out, {});
  source = "in-process chat loop";
  return out.str();
#endif
}

void service_cli_equivalence(Outcome& o) {
  const auto script = read_script();
  std::string source;
  const auto cli = split_lines(cli_transcript(script, source));

  led::ChatServer server({});
  const int port = server.bind("127.0.0.1", 0);
  server.set_engine(fixture_engine());
  server.start();

  const auto post = [&](const std::string& session, const std::string& utterance) {
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(30, 0);
    const auto res = client.Post("/v1/chat", json{{"session_id", session}, {"utterance", utterance}}.dump(),
                                 "application/json");
    if (!res || res->status != 200) return json();
    return json::parse(res->body);
  };

  std::vector<std::string> http;
  for (const auto& line : script) {
    const auto reply = post("equivalence", line);
    http.push_back(reply.is_object() ? reply["response"].get<std::string>() : "<request failed>");
  }
  o.expect(cli.size() == http.size(), source + " printed " + std::to_string(cli.size()) + " lines for " +
                                          std::to_string(http.size()) + " turns");
  for (std::size_t i = 0; i < std::min(cli.size(), http.size()); ++i) {
    o.expect(cli[i] == http[i], "turn " + std::to_string(i + 1) + ": cli \"" + cli[i] + "\" vs http \"" + http[i] + "\"");
  }

  // Sixteen sessions, each running its own rotation of the script at once.
  constexpr int kSessions = 16;
  std::vector<std::vector<std::string>> scripts(kSessions);
  for (int s = 0; s < kSessions; ++s) {
    for (std::size_t i = 0; i < script.size(); ++i) scripts[s].push_back(script[(i + s) % script.size()]);
  }
  std::vector<std::future<std::vector<std::string>>> runs;
  for (int s = 0; s < kSessions; ++s) {
    runs.push_back(std::async(std::launch::async, [&, s] {
      std::vector<std::string> responses;
      for (const auto& line : scripts[s]) {
        const auto reply = post("parallel-" + std::to_string(s), line);
        responses.push_back(reply.is_object() ? reply["response"].get<std::string>() : "<request failed>");
      }
      return responses;
    }));
  }
  httplib::Client client("127.0.0.1", port);
  for (int s = 0; s < kSessions; ++s) {
    const auto got = runs[s].get();
    const auto expected = led::run_script(*fixture_engine(), scripts[s], "expected");
    const auto snap = client.Get("/v1/session/parallel-" + std::to_string(s));
    const auto history = snap && snap->status == 200 ? json::parse(snap->body) : json();
    o.expect(history.is_object() && history["turns"].size() == scripts[s].size(),
             "session " + std::to_string(s) + " history has the wrong length");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      o.expect(got[i] == expected[i].response,
               "session " + std::to_string(s) + " turn " + std::to_string(i + 1) + " differs from a solo run");
      if (history.is_object() && i < history["turns"].size()) {
        o.expect(history["turns"][i]["user"] == scripts[s][i],
                 "session " + std::to_string(s) + " history holds another session's turn");
        o.expect(history["turns"][i]["response"] == expected[i].response,
                 "session " + std::to_string(s) + " stored response differs");
      }
    }
  }
  server.stop();
  o.note = source + " vs HTTP, " + std::to_string(kSessions) + " parallel sessions";
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--update-golden") {
      std::ofstream out(kGolden, std::ios::binary);
      for (const auto& t : script_traces()) out << t.dump() << "\n";
      std::cout << "wrote " << kGolden << "\n";
      return 0;
    }
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string id; std::getline(list, id, ',');) only.insert(std::stoi(id));
    }
  }

  const std::vector<Criterion> criteria{
      {1, "ssa arithmetic parity", 1.0, ssa_parity},
      {2, "bm25 oracle equivalence", 60.0, bm25_oracle},
      {3, "beam-search optimality", 30.0, beam_optimality},
      {4, "decoding degeneracies", 10.0, decoding_degeneracies},
      {5, "perplexity identities", 5.0, perplexity_identities},
      {6, "router properties", 30.0, router_properties},
      {7, "end-to-end golden traces", 10.0, golden_traces},
      {8, "safety gate guarantees", 20.0, safety_guarantees},
      {9, "metric hand-checks", 10.0, metric_hand_checks},
      {10, "dataset validation", 5.0, dataset_validation},
      {11, "service/cli equivalence", 30.0, service_cli_equivalence},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(outcome);
    } catch (const std::exception& e) {
      outcome.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_s) {
      outcome.failures.push_back("took " + num(seconds, 3) + " s, budget " + num(c.budget_s, 3) + " s");
    }
    const bool pass = outcome.failures.empty();
    failed += !pass;
    std::printf("%s criterion %2d  %-26s %8.3f s  (%zu checks; %s)\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                outcome.checks, outcome.note.c_str());
    for (std::size_t i = 0; i < std::min<std::size_t>(outcome.failures.size(), 5); ++i) {
      std::printf("     - %s\n", outcome.failures[i].c_str());
    }
    if (outcome.failures.size() > 5) std::printf("     - ... %zu more\n", outcome.failures.size() - 5);
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
