#include "qtb/models/checkpoint.hpp"

#include <fstream>
#include <set>

#include "qtb/errors.hpp"
#include "qtb/models/config_json.hpp"

namespace qtb {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return json{{"arch", architecture_tag(c.arch)},
              {"vocab_size", c.vocab_size},
              {"d_model", c.d_model},
              {"heads", c.heads},
              {"d_ff", c.d_ff},
              {"blocks", c.blocks},
              {"d_q", c.d_q},
              {"circuit_layers", c.circuit_layers},
              {"n_qubits", c.n_qubits},
              {"max_seq_len", c.max_seq_len},
              {"seed", c.seed},
              {"window", c.window}};
}

ModelConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ContractError("model config must be a JSON object");
  static const std::set<std::string> known{"arch",   "vocab_size",     "d_model",  "heads",       "d_ff", "blocks",
                                           "d_q",    "circuit_layers", "n_qubits", "max_seq_len", "seed", "window"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ContractError("model config: unknown key '" + key + "'");
  if (!j.contains("arch")) throw ContractError("model config: missing 'arch'");
  auto c = ModelConfig::defaults(parse_architecture(j.at("arch").get<std::string>()), j.value("vocab_size", std::size_t{0}));
  try {
    c.d_model = j.value("d_model", c.d_model);
    c.heads = j.value("heads", c.heads);
    c.d_ff = j.value("d_ff", c.d_ff);
    c.blocks = j.value("blocks", c.blocks);
    c.d_q = j.value("d_q", c.d_q);
    c.circuit_layers = j.value("circuit_layers", c.circuit_layers);
    c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
    c.seed = j.value("seed", c.seed);
    c.window = j.value("window", c.window);
    if (c.arch == Architecture::Qasa && c.heads != 0) c.n_qubits = qasa_qubits(c.head_dim());
    c.n_qubits = j.value("n_qubits", c.n_qubits);
  } catch (const json::exception& e) {
    throw ContractError(std::string("model config: ") + e.what());
  }
  return c;
}

Checkpoint make_checkpoint(const LanguageModel& model, const Vocabulary& vocab, const Adam* optimizer, std::size_t epoch,
                           Rng::State rng_state) {
  Checkpoint ck;
  ck.config = model.config();
  ck.vocab = vocab.tokens();
  for (const auto& [name, t] : model.parameters().entries()) {
    ck.param_names.push_back(name);
    ck.param_shapes.push_back(t.shape());
    ck.param_values.emplace_back(t.data().begin(), t.data().end());
  }
  if (optimizer != nullptr)
    ck.optimizer = OptimizerState{optimizer->steps_taken(), optimizer->first_moments(), optimizer->second_moments()};
  ck.epoch = epoch;
  ck.rng_state = rng_state;
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  json params = json::array();
  for (std::size_t i = 0; i < ck.param_names.size(); ++i)
    params.push_back({{"name", ck.param_names[i]}, {"shape", ck.param_shapes[i]}, {"values", ck.param_values[i]}});
  json j{{"format_version", kCheckpointFormatVersion},
         {"config", config_to_json(ck.config)},
         {"vocab", ck.vocab},
         {"params", params},
         {"optimizer", nullptr},
         {"epoch", ck.epoch},
         {"rng_state", ck.rng_state}};
  if (ck.optimizer)
    j["optimizer"] = {{"steps", ck.optimizer->steps}, {"m", ck.optimizer->first_moments}, {"v", ck.optimizer->second_moments}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint not found: " + path.string());
  Checkpoint ck;
  try {
    const auto j = json::parse(in);
    const auto version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw ContractError("checkpoint format_version " + std::to_string(version) + " is not supported");
    ck.config = config_from_json(j.at("config"));
    ck.vocab = j.at("vocab").get<std::vector<std::string>>();
    for (const auto& p : j.at("params")) {
      ck.param_names.push_back(p.at("name").get<std::string>());
      ck.param_shapes.push_back(p.at("shape").get<Shape>());
      ck.param_values.push_back(p.at("values").get<std::vector<double>>());
    }
    if (!j.at("optimizer").is_null()) {
      const auto& o = j.at("optimizer");
      ck.optimizer = OptimizerState{o.at("steps").get<std::int64_t>(), o.at("m").get<std::vector<std::vector<double>>>(),
                                    o.at("v").get<std::vector<std::vector<double>>>()};
    }
    ck.epoch = j.at("epoch").get<std::size_t>();
    ck.rng_state = j.at("rng_state").get<Rng::State>();
  } catch (const json::exception& e) {
    throw ContractError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return ck;
}

std::unique_ptr<LanguageModel> restore_model(const Checkpoint& ck) {
  auto model = create_model(ck.config);
  const auto& entries = model->parameters().entries();
  if (entries.size() != ck.param_names.size())
    throw ContractError("checkpoint has " + std::to_string(ck.param_names.size()) + " parameters, model expects " +
                        std::to_string(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != ck.param_names[i] || entries[i].second.shape() != ck.param_shapes[i])
      throw ContractError("checkpoint parameter '" + ck.param_names[i] + "' does not match model parameter '" +
                          entries[i].first + "'");
  }
  model->parameters().restore(ck.param_values);
  return model;
}

void restore_optimizer(const Checkpoint& ck, Adam& optimizer) {
  if (!ck.optimizer) throw ContractError("checkpoint carries no optimizer state");
  optimizer.restore(ck.optimizer->steps, ck.optimizer->first_moments, ck.optimizer->second_moments);
}

}  // namespace qtb
