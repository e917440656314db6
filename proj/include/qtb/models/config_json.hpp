#pragma once

#include "json.hpp"
#include "qtb/models/config.hpp"

namespace qtb {

/// JSON object with keys arch, vocab_size, d_model, heads, d_ff, blocks,
/// d_q, circuit_layers, n_qubits, max_seq_len, seed, window.
nlohmann::json config_to_json(const ModelConfig& config);
/// Missing keys keep the defaults of ModelConfig::defaults(arch, vocab_size);
/// unknown keys throw ContractError.
ModelConfig config_from_json(const nlohmann::json& j);

}  // namespace qtb
