#include "qtb/models/config.hpp"

#include <algorithm>
#include <cctype>

#include "qtb/errors.hpp"
#include "qtb/qsim/statevector.hpp"

namespace qtb {

std::string architecture_tag(Architecture arch) {
  switch (arch) {
    case Architecture::Transformer: return "transformer";
    case Architecture::Mlp: return "mlp";
    case Architecture::Qksan: return "qksan";
    case Architecture::Qasa: return "qasa";
    case Architecture::Qrwkv: return "qrwkv";
  }
  return "unknown";
}

std::string architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::Transformer: return "Transformer";
    case Architecture::Mlp: return "MLP";
    case Architecture::Qksan: return "QKSAN";
    case Architecture::Qasa: return "QASA";
    case Architecture::Qrwkv: return "QRWKV";
  }
  return "unknown";
}

Architecture parse_architecture(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto arch : all_architectures())
    if (architecture_tag(arch) == lower) return arch;
  throw ContractError("unknown model '" + text + "' (expected transformer, mlp, qksan, qasa or qrwkv)");
}

const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> all{Architecture::Transformer, Architecture::Mlp, Architecture::Qksan,
                                             Architecture::Qasa, Architecture::Qrwkv};
  return all;
}

std::size_t qasa_qubits(std::size_t head_dim) { return static_cast<std::size_t>(qsim::qubits_for_width(head_dim)); }

ModelConfig ModelConfig::defaults(Architecture arch, std::size_t vocab_size) {
  ModelConfig c;
  c.arch = arch;
  c.vocab_size = vocab_size;
  if (arch == Architecture::Qasa) c.n_qubits = qasa_qubits(c.head_dim());
  if (arch == Architecture::Qrwkv) c.n_qubits = 4;
  return c;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("ModelConfig: " + what); };
  if (vocab_size <= 4) fail("vocab_size must exceed the 4 reserved tokens");
  if (d_model < 2 || d_model % 2 != 0) fail("d_model must be even and at least 2");
  if (heads == 0 || d_model % heads != 0) fail("d_model must be divisible by heads");
  if (d_ff == 0) fail("d_ff must be positive");
  if (blocks == 0) fail("blocks must be positive");
  if (d_q == 0) fail("d_q must be positive");
  if (circuit_layers == 0) fail("circuit_layers must be positive");
  if (max_seq_len < 2) fail("max_seq_len must be at least 2");
  if (window == 0) fail("window must be positive");
  if (arch == Architecture::Qasa) {
    if (head_dim() < 2) fail("QASA needs a head width of at least 2");
    if (n_qubits != qasa_qubits(head_dim())) fail("QASA n_qubits must equal ceil(log2(head width))");
  }
  if (arch == Architecture::Qrwkv && (n_qubits < 2 || n_qubits > static_cast<std::size_t>(qsim::kMaxQubits)))
    fail("QRWKV n_qubits must lie in [2, " + std::to_string(qsim::kMaxQubits) + "]");
}

}  // namespace qtb
