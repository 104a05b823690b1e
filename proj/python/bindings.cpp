#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "led/config.hpp"
#include "led/core.hpp"
#include "led/data.hpp"
#include "led/errors.hpp"
#include "led/eval.hpp"
#include "led/generator.hpp"
#include "led/knowledge.hpp"
#include "led/pipeline.hpp"
#include "led/resolver.hpp"
#include "led/router.hpp"
#include "led/safety.hpp"
#include "led/serialize.hpp"
#include "led/text.hpp"

namespace py = pybind11;

namespace {

// Adapts any Python object with `vocabulary`, `eos` and
// `next_distribution(prefix)` to the backend contract.
class PyLm final : public led::LmBackend {
 public:
  explicit PyLm(py::object impl) : impl_(std::move(impl)) {
    vocabulary_ = impl_.attr("vocabulary").cast<std::vector<std::string>>();
    eos_ = impl_.attr("eos").cast<led::TokenId>();
  }
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  led::TokenId eos() const override { return eos_; }
  std::vector<double> next_distribution(std::span<const led::TokenId> prefix) const override {
    std::vector<led::TokenId> p(prefix.begin(), prefix.end());
    return impl_.attr("next_distribution")(p).cast<std::vector<double>>();
  }

 private:
  py::object impl_;
  std::vector<std::string> vocabulary_;
  led::TokenId eos_ = 0;
};

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict decoded_dict(const led::Decoded& d) {
  py::dict out;
  out["tokens"] = d.tokens;
  out["log_prob"] = d.log_prob;
  out["finished"] = d.finished;
  return out;
}

led::DecodeConfig make_decode(const std::string& mode, int beam_width, int k, int max_len, std::uint64_t seed,
                              bool length_normalize) {
  led::DecodeConfig c;
  if (mode == "beam") c.mode = led::DecodeMode::Beam;
  else if (mode == "topk") c.mode = led::DecodeMode::TopK;
  else throw led::InvalidInput("mode must be \"beam\" or \"topk\"");
  c.beam_width = beam_width;
  c.k = k;
  c.max_len = max_len;
  c.seed = seed;
  c.length_normalize = length_normalize;
  return c;
}

py::list turn_results(const std::vector<led::TurnResult>& results) {
  py::list out;
  for (const auto& r : results) {
    py::dict d;
    d["response"] = r.response;
    d["turn"] = to_py(led::to_json(r.turn));
    d["trace"] = to_py(led::to_json(r.trace, false));
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_led, m) {
  m.doc() = "Conversational pipeline engine";

  auto error = py::register_exception<led::Error>(m, "Error");
  py::register_exception<led::InvalidInput>(m, "InvalidInput", error.ptr());
  py::register_exception<led::ResourceError>(m, "ResourceError", error.ptr());
  py::register_exception<led::ParseError>(m, "ParseError", error.ptr());
  py::register_exception<led::BackendError>(m, "BackendError", error.ptr());
  py::register_exception<led::ZeroProbabilityError>(m, "ZeroProbabilityError", error.ptr());

  m.def("tokenize", &led::tokenize, py::arg("text"));
  m.def("normalize_nfc", &led::normalize_nfc, py::arg("text"));

  // resolver
  py::class_<led::Gazetteer>(m, "Gazetteer")
      .def(py::init<>())
      .def_static("load", &led::Gazetteer::load, py::arg("path"))
      .def("add", &led::Gazetteer::add, py::arg("surface"), py::arg("entity_type"))
      .def("lookup", py::overload_cast<std::string_view>(&led::Gazetteer::lookup, py::const_), py::arg("surface"))
      .def("__len__", &led::Gazetteer::size);

  m.def(
      "extract_entities",
      [](const std::string& text, const led::Gazetteer& g) {
        py::list out;
        for (const auto& e : led::extract_entities(text, g)) out.append(py::make_tuple(e.surface, e.entity_type));
        return out;
      },
      py::arg("text"), py::arg("gazetteer") = led::Gazetteer{});

  // router
  py::class_<led::RouterModel>(m, "RouterModel")
      .def_static("zeros", &led::RouterModel::zeros, py::arg("dim") = led::kDefaultFeatureDim, py::arg("hash_seed") = 0)
      .def_static("load", &led::load_router_model, py::arg("path"))
      .def("save", [](const led::RouterModel& self, const std::filesystem::path& p) { led::save_router_model(self, p); })
      .def("score", [](const led::RouterModel& self, const std::string& text) { return led::score_factual(self, text); })
      .def_readonly("dim", &led::RouterModel::dim)
      .def_readonly("hash_seed", &led::RouterModel::hash_seed)
      .def_readonly("bias", &led::RouterModel::bias)
      .def("__eq__", [](const led::RouterModel& a, const led::RouterModel& b) { return a == b; });

  m.def(
      "train_router",
      [](const std::vector<std::pair<std::string, int>>& data, int epochs, double lr, std::uint32_t dim,
         std::uint64_t seed) {
        std::vector<led::LabeledQuestion> qs;
        for (const auto& [text, label] : data) qs.push_back({text, label});
        return led::train_router(qs, {epochs, lr, dim, seed});
      },
      py::arg("data"), py::arg("epochs") = 5, py::arg("learning_rate") = 0.1, py::arg("dim") = led::kDefaultFeatureDim,
      py::arg("seed") = 0);
  m.def(
      "route",
      [](double score, double threshold) { return std::string(led::to_string(led::route(score, {threshold}))); },
      py::arg("score"), py::arg("threshold") = led::kDefaultFactualThreshold);

  // knowledge
  py::class_<led::PassageIndex>(m, "PassageIndex")
      .def_static(
          "build",
          [](const std::vector<std::tuple<std::string, std::string, std::string>>& passages, double k1, double b) {
            std::vector<led::Passage> ps;
            for (const auto& [id, url, text] : passages) ps.push_back(led::Passage::make(id, url, text));
            return led::PassageIndex::build(std::move(ps), {k1, b});
          },
          py::arg("passages"), py::arg("k1") = 1.2, py::arg("b") = 0.75)
      .def_static("from_corpus",
                  [](const std::filesystem::path& corpus, double k1, double b) {
                    return led::PassageIndex::build(led::load_corpus(corpus), {k1, b});
                  },
                  py::arg("path"), py::arg("k1") = 1.2, py::arg("b") = 0.75)
      .def_static("load", &led::PassageIndex::load, py::arg("path"))
      .def("save", &led::PassageIndex::save, py::arg("path"))
      .def("encode", [](const led::PassageIndex& self) {
        const auto bytes = self.encode();
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def("__len__", &led::PassageIndex::size)
      .def_property_readonly("avgdl", &led::PassageIndex::avgdl)
      .def(
          "search",
          [](const led::PassageIndex& self, const std::string& query, std::size_t k) {
            py::list out;
            for (const auto& h : led::bm25_search(self, led::Utterance(query), k)) {
              out.append(py::make_tuple(h.passage_id, h.bm25));
            }
            return out;
          },
          py::arg("query"), py::arg("k") = led::kDefaultTopK)
      .def(
          "answer",
          [](const led::PassageIndex& self, const std::string& query, std::size_t k, double alpha) -> py::object {
            const auto a = led::answer_factual(self, led::Utterance(query), k, alpha);
            if (!a.best) return py::none();
            return to_py(led::to_json(*a.best));
          },
          py::arg("query"), py::arg("k") = led::kDefaultTopK, py::arg("alpha") = led::kDefaultFusionAlpha);

  m.def("fuse_scores",
        [](double bm25, double bm25_max, double span, double alpha) {
          return led::fuse_scores(bm25, bm25_max, span, alpha).fused;
        },
        py::arg("bm25"), py::arg("bm25_max"), py::arg("span_score"), py::arg("alpha") = led::kDefaultFusionAlpha);
  m.def("paraphrase",
        [](const std::string& span, const std::string& query) { return led::paraphrase(span, led::Utterance(query)); },
        py::arg("span"), py::arg("query"));

  // generator
  m.def(
      "greedy_decode",
      [](py::object lm, const std::vector<led::TokenId>& prompt, int max_len) {
        return decoded_dict(led::greedy_decode(PyLm(std::move(lm)), prompt, max_len));
      },
      py::arg("backend"), py::arg("prompt"), py::arg("max_len"));
  m.def(
      "decode",
      [](py::object lm, const std::vector<led::TokenId>& prompt, const std::string& mode, int beam_width, int k,
         int max_len, std::uint64_t seed, bool length_normalize) {
        const PyLm backend(std::move(lm));
        const auto config = make_decode(mode, beam_width, k, max_len, seed, length_normalize);
        return decoded_dict(config.mode == led::DecodeMode::Beam ? led::beam_decode(backend, prompt, config)
                                                                 : led::topk_decode(backend, prompt, config));
      },
      py::arg("backend"), py::arg("prompt"), py::arg("mode") = "beam", py::arg("beam_width") = 4, py::arg("k") = 10,
      py::arg("max_len") = 32, py::arg("seed") = 0, py::arg("length_normalize") = false);
  m.def(
      "sequence_logprob",
      [](py::object lm, const std::vector<led::TokenId>& tokens, const std::vector<led::TokenId>& prompt) {
        return led::sequence_logprob(PyLm(std::move(lm)), tokens, prompt);
      },
      py::arg("backend"), py::arg("tokens"), py::arg("prompt") = std::vector<led::TokenId>{});

  // safety
  py::class_<led::SafetyConfig>(m, "SafetyConfig")
      .def(py::init<std::vector<std::string>, std::string, double>(), py::arg("blocklist") = std::vector<std::string>{},
           py::arg("fallback") = std::string(led::kDefaultFallback), py::arg("jaccard") = led::kContradictionJaccard)
      .def_property_readonly("fallback", &led::SafetyConfig::fallback_text);
  m.def("check_toxic", &led::check_toxic, py::arg("text"), py::arg("config"));
  m.def(
      "check_inconsistent",
      [](const std::string& candidate, const std::vector<std::string>& prior_responses, double threshold) {
        led::ConversationState state;
        for (const auto& r : prior_responses) {
          led::Turn t;
          t.user = led::Utterance("-");
          t.rewritten = t.user;
          t.response = r;
          state.turns.push_back(std::move(t));
        }
        return led::check_inconsistent(candidate, state, threshold);
      },
      py::arg("candidate"), py::arg("prior_responses"), py::arg("jaccard") = led::kContradictionJaccard);

  // eval
  m.def(
      "perplexity",
      [](const std::vector<std::vector<double>>& records) {
        std::vector<led::PplRecord> rs;
        for (const auto& r : records) rs.push_back({r});
        return led::perplexity(rs);
      },
      py::arg("records"));
  m.def(
      "ssa_from_rates",
      [](double sens, double spec) {
        const auto s = led::ssa_from_rates(sens, spec);
        py::dict d;
        d["sensibleness"] = s.sensibleness;
        d["specificity"] = s.specificity;
        d["ssa"] = s.ssa;
        d["ssa_rounded"] = s.ssa_rounded;
        return d;
      },
      py::arg("sensibleness"), py::arg("specificity"));
  m.def("round_half_up", &led::round_half_up, py::arg("value"), py::arg("decimals") = 2);
  m.def("token_f1", &led::token_f1, py::arg("prediction"), py::arg("gold"));
  m.def("exact_match", &led::exact_match, py::arg("prediction"), py::arg("gold"));
  m.def(
      "rouge",
      [](std::string_view p, std::string_view g) {
        const auto r = led::rouge(p, g);
        return py::make_tuple(r.rouge1, r.rougeL);
      },
      py::arg("prediction"), py::arg("gold"));
  m.def(
      "recall_at_k",
      [](const std::vector<std::pair<std::vector<std::string>, std::set<std::string>>>& judgments, std::size_t k) {
        std::vector<led::RankJudgment> js;
        for (const auto& [ranked, relevant] : judgments) js.push_back({ranked, relevant});
        return led::recall_at_k(js, k);
      },
      py::arg("judgments"), py::arg("k"));
  m.def(
      "mrr",
      [](const std::vector<std::pair<std::vector<std::string>, std::set<std::string>>>& judgments) {
        std::vector<led::RankJudgment> js;
        for (const auto& [ranked, relevant] : judgments) js.push_back({ranked, relevant});
        return led::mrr(js);
      },
      py::arg("judgments"));

  // data
  m.def(
      "validate_dataset",
      [](const std::filesystem::path& path, const std::string& profile) {
        const auto report = led::validate_dataset(led::load_dialog_dataset(path), led::profile_from_string(profile));
        py::list out;
        for (const auto& v : report.violations) out.append(py::make_tuple(v.rule, v.locator, v.message));
        return out;
      },
      py::arg("path"), py::arg("profile") = "internal-media");

  // pipeline
  py::class_<led::Engine, std::shared_ptr<led::Engine>>(m, "Engine")
      .def(py::init([](const std::filesystem::path& config) {
             return std::make_shared<led::Engine>(led::load_config(config));
           }),
           py::arg("config"))
      .def(
          "run_script",
          [](const led::Engine& self, const std::vector<std::string>& script) {
            return turn_results(led::run_script(self, script));
          },
          py::arg("script"))
      .def(
          "score_factual",
          [](const led::Engine& self, const std::string& text) { return led::score_factual(self.router(), text); },
          py::arg("text"));
}
