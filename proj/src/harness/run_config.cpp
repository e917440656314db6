#include "qtb/harness/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "qtb/corpus/synthesis.hpp"
#include "qtb/errors.hpp"
#include "qtb/models/config_json.hpp"

namespace qtb {

using nlohmann::json;

RunConfig RunConfig::defaults() {
  RunConfig c;
  for (auto arch : all_architectures()) c.models.push_back(ModelConfig::defaults(arch, 0));
  for (auto name : kDatasetNames) c.datasets.emplace_back(name);
  return c;
}

void RunConfig::validate() const {
  if (epochs < 1) throw ContractError("run config: epochs must be at least 1");
  if (patience < 1) throw ContractError("run config: patience must be at least 1");
  if (batch_size < 1) throw ContractError("run config: batch_size must be at least 1");
  if (jobs < 1) throw ContractError("run config: jobs must be at least 1");
  if (!(learning_rate > 0.0)) throw ContractError("run config: learning_rate must be positive");
  if (!(min_delta >= 0.0)) throw ContractError("run config: min_delta must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ContractError("run config: train_fraction must be in (0, 1)");
  if (!(temperature > 0.0)) throw ContractError("run config: temperature must be positive");
  if (models.empty()) throw ContractError("run config: no models");
  if (datasets.empty()) throw ContractError("run config: no datasets");
  std::set<Architecture> seen;
  for (const auto& m : models) {
    if (!seen.insert(m.arch).second)
      throw ContractError("run config: architecture '" + architecture_tag(m.arch) + "' listed twice");
    auto sized = m;
    sized.vocab_size = 8;
    sized.validate();
  }
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (std::find(kDatasetNames.begin(), kDatasetNames.end(), d) == kDatasetNames.end())
      throw ContractError("run config: unknown dataset '" + d + "'");
    if (!names.insert(d).second) throw ContractError("run config: dataset '" + d + "' listed twice");
  }
}

ModelConfig RunConfig::model_config(Architecture arch, std::size_t vocab_size, std::uint64_t seed) const {
  const auto it = std::find_if(models.begin(), models.end(), [&](const ModelConfig& m) { return m.arch == arch; });
  if (it == models.end()) throw ContractError("run config: no entry for architecture '" + architecture_tag(arch) + "'");
  auto c = *it;
  c.vocab_size = vocab_size;
  c.seed = seed;
  c.validate();
  return c;
}

DecodeMode parse_decode_mode(const std::string& text) {
  if (text == "greedy") return DecodeMode::Greedy;
  if (text == "sample") return DecodeMode::Sample;
  throw ContractError("unknown decode mode '" + text + "' (expected greedy or sample)");
}

std::string decode_mode_name(DecodeMode mode) { return mode == DecodeMode::Greedy ? "greedy" : "sample"; }

json run_config_to_json(const RunConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) {
    auto j = config_to_json(m);
    j.erase("vocab_size");
    j.erase("seed");
    models.push_back(j);
  }
  return json{{"models", models},
              {"datasets", c.datasets},
              {"epochs", c.epochs},
              {"patience", c.patience},
              {"min_delta", c.min_delta},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"train_fraction", c.train_fraction},
              {"seed", c.seed},
              {"output_dir", c.output_dir.string()},
              {"decode", decode_mode_name(c.decode)},
              {"temperature", c.temperature},
              {"jobs", c.jobs}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ContractError("run config must be a JSON object");
  static const std::set<std::string> known{"models",         "datasets", "epochs",     "patience", "min_delta",
                                           "batch_size",     "learning_rate", "train_fraction", "seed",
                                           "output_dir",     "decode",   "temperature", "jobs"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ContractError("run config: unknown key '" + key + "'");
  auto c = RunConfig::defaults();
  try {
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(config_from_json(m));
    }
    if (j.contains("datasets")) c.datasets = j.at("datasets").get<std::vector<std::string>>();
    c.epochs = j.value("epochs", c.epochs);
    c.patience = j.value("patience", c.patience);
    c.min_delta = j.value("min_delta", c.min_delta);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (j.contains("decode")) c.decode = parse_decode_mode(j.at("decode").get<std::string>());
    c.temperature = j.value("temperature", c.temperature);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    throw ContractError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  try {
    return run_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ContractError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace qtb
