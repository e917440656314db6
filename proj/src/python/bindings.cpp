// Python extension exposing corpora, models, training, metrics and the
// benchmark. Structured results cross the boundary as JSON text; the Python
// package decodes them.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qtb/corpus/synthesis.hpp"
#include "qtb/errors.hpp"
#include "qtb/harness/benchmark.hpp"
#include "qtb/models/checkpoint.hpp"
#include "qtb/models/config_json.hpp"
#include "qtb/qsim/circuit.hpp"
#include "qtb/qsim/vqc.hpp"

namespace py = pybind11;
using namespace qtb;

namespace {

using Sequences = std::vector<std::vector<TokenId>>;

struct PyModel {
  std::unique_ptr<LanguageModel> model;
};

PyModel make_model(const std::string& arch, std::size_t vocab_size, const std::string& overrides) {
  auto j = overrides.empty() ? nlohmann::json::object() : nlohmann::json::parse(overrides);
  j["arch"] = arch;
  j["vocab_size"] = vocab_size;
  return {create_model(config_from_json(j))};
}

py::array_t<double> forward(const PyModel& m, const std::vector<TokenId>& ids) {
  const auto logits = m.model->forward(ids);
  py::array_t<double> out({logits.rows(), logits.cols()});
  std::copy(logits.data().begin(), logits.data().end(), out.mutable_data());
  return out;
}

std::vector<TokenId> generate_ids(const PyModel& m, const std::vector<TokenId>& prompt, const std::string& decode,
                                  double temperature, std::size_t max_new, std::uint64_t seed) {
  Rng rng(seed);
  return generate(*m.model, prompt, DecodeOptions{parse_decode_mode(decode), temperature, max_new}, &rng);
}

std::string train_model(PyModel& m, const Sequences& train_set, const Sequences& val_set, std::size_t epochs,
                        std::size_t patience, std::size_t batch_size, double learning_rate, double min_delta,
                        std::uint64_t seed) {
  Rng rng(seed);
  const TrainOptions options{epochs, patience, min_delta, batch_size, learning_rate};
  TrainLog log;
  {
    py::gil_scoped_release release;
    log = train(*m.model, train_set, val_set, options, rng);
  }
  auto j = train_log_to_json(log);
  j["wall_seconds"] = log.wall_seconds;
  return j.dump();
}

std::string evaluate_model(const PyModel& m, const Vocabulary& vocab, const std::string& dataset, const Sequences& seqs,
                           std::size_t max_length_words, const std::string& decode, double temperature,
                           std::uint64_t seed) {
  Rng rng(seed);
  const EvalOptions options{parse_decode_mode(decode), temperature, 0.25, max_length_words};
  return report_to_json(evaluate(*m.model, vocab, dataset, seqs, options, &rng)).dump();
}

std::string benchmark(const std::string& config_json, const std::string& out_dir) {
  const auto config = run_config_from_json(nlohmann::json::parse(config_json));
  BenchmarkResult result;
  {
    py::gil_scoped_release release;
    result = run_benchmark(config);
  }
  if (!out_dir.empty()) write_benchmark_outputs(result, out_dir);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : result.reports()) arr.push_back(report_to_json(r));
  return arr.dump();
}

std::string manifest_json(const DatasetManifest& m) {
  return nlohmann::json{{"name", m.name},
                        {"samples", m.samples},
                        {"avg_length_words", m.avg_length_words},
                        {"vocab_size", m.vocab_size},
                        {"max_length_words", m.max_length_words},
                        {"description", m.description}}
      .dump();
}

std::vector<double> circuit_expectations(const std::string& kind, int n_qubits, const std::vector<double>& params,
                                         const std::vector<double>& x, int layers) {
  qsim::CircuitSpec spec = kind == "qasa"    ? qsim::build_qasa_circuit(n_qubits, layers)
                           : kind == "qrwkv" ? qsim::build_qrwkv_circuit(n_qubits)
                                             : throw ContractError("unknown circuit kind '" + kind + "'");
  const auto m = qsim::vqc_measure(spec, params, x);
  return {m.begin(), m.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of qtextbench";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
  py::register_exception<LengthError>(m, "LengthError", PyExc_ValueError);
  py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);
  py::register_exception<SplitError>(m, "SplitError", PyExc_ValueError);

  m.def("tokenize", [](const std::string& text) { return tokenize(text); });

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("build", [](const std::vector<std::string>& texts) { return Vocabulary::build(texts); })
      .def_static("from_tokens", &Vocabulary::from_tokens)
      .def("__len__", &Vocabulary::size)
      .def("id", [](const Vocabulary& v, const std::string& t) { return v.id(t); })
      .def("token", &Vocabulary::token)
      .def_property_readonly("tokens", &Vocabulary::tokens)
      .def("encode", [](const Vocabulary& v, const std::string& text) { return v.encode(text); })
      .def("decode", [](const Vocabulary& v, const std::vector<TokenId>& ids) { return v.decode(ids); });

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("name", &Dataset::name)
      .def_readonly("texts", &Dataset::texts)
      .def_readonly("vocab", &Dataset::vocab)
      .def_readonly("sequences", &Dataset::sequences)
      .def_property_readonly("manifest_json", [](const Dataset& d) { return manifest_json(d.manifest); });

  m.attr("DATASET_NAMES") = std::vector<std::string>(kDatasetNames.begin(), kDatasetNames.end());
  m.def("synthesize_dataset", &synthesize_dataset, py::arg("name"), py::arg("seed") = 42);
  m.def("write_dataset", [](const Dataset& d, const std::string& dir) { write_dataset(d, dir); });
  m.def("train_val_split", [](std::size_t n, double fraction, std::uint64_t seed) {
    const auto s = train_val_split(n, fraction, seed);
    return std::make_pair(s.train, s.validation);
  });

  py::class_<PyModel>(m, "Model")
      .def(py::init(&make_model), py::arg("arch"), py::arg("vocab_size"), py::arg("overrides_json") = "")
      .def("forward", &forward, py::arg("ids"))
      .def("generate", &generate_ids, py::arg("prompt"), py::arg("decode") = "greedy", py::arg("temperature") = 1.0,
           py::arg("max_new") = 16, py::arg("seed") = 0)
      .def_property_readonly("config_json", [](const PyModel& p) { return config_to_json(p.model->config()).dump(); })
      .def_property_readonly("parameter_count", [](const PyModel& p) { return p.model->parameters().scalar_count(); })
      .def("save", [](const PyModel& p, const Vocabulary& vocab,
                      const std::string& path) { save_checkpoint(make_checkpoint(*p.model, vocab), path); })
      .def_static("load", [](const std::string& path) {
        const auto ck = load_checkpoint(path);
        return std::make_pair(PyModel{restore_model(ck)}, Vocabulary::from_tokens(ck.vocab));
      });

  m.def("train", &train_model, py::arg("model"), py::arg("train_set"), py::arg("val_set"), py::arg("epochs") = 50,
        py::arg("patience") = 10, py::arg("batch_size") = 8, py::arg("learning_rate") = 1e-3, py::arg("min_delta") = 1e-6,
        py::arg("seed") = 42);
  m.def("evaluate", &evaluate_model, py::arg("model"), py::arg("vocab"), py::arg("dataset"), py::arg("sequences"),
        py::arg("max_length_words"), py::arg("decode") = "greedy", py::arg("temperature") = 1.0, py::arg("seed") = 42);
  m.def("perplexity", [](const PyModel& p, const Sequences& seqs) { return perplexity(*p.model, seqs); });
  m.def("benchmark", &benchmark, py::arg("config_json") = "{}", py::arg("out_dir") = "");

  m.def("bleu", [](const std::vector<std::string>& c, const std::vector<std::string>& r, std::size_t n) {
    return bleu_n(c, r, n);
  });
  m.def("distinct_n", [](const std::vector<std::string>& t, std::size_t n) { return distinct_n(t, n); });
  m.def("repetition_rate", [](const std::vector<std::string>& t) { return repetition_rate(t); });
  m.def("fluency_stats", [](const std::vector<std::string>& texts) {
    const auto f = fluency_stats(texts);
    return std::make_pair(f.avg_sentence_length, f.length_variation);
  });
  m.def("perplexity_from_probabilities", [](const std::vector<double>& p) { return perplexity_from_probabilities(p); });

  m.def("circuit_expectations", &circuit_expectations, py::arg("kind"), py::arg("n_qubits"), py::arg("params"),
        py::arg("x"), py::arg("layers") = 2);
}
