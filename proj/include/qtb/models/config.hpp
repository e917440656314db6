#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qtb {

enum class Architecture { Transformer, Mlp, Qksan, Qasa, Qrwkv };

/// Lower-case tag used in configs and on the command line ("qksan", ...).
std::string architecture_tag(Architecture arch);
/// Display name used in report tables ("QKSAN", "Transformer", ...).
std::string architecture_name(Architecture arch);
/// Accepts tags and display names, case-insensitively. Throws ContractError.
Architecture parse_architecture(const std::string& text);
const std::vector<Architecture>& all_architectures();

struct ModelConfig {
  Architecture arch = Architecture::Qksan;
  std::size_t vocab_size = 0;
  std::size_t d_model = 32;
  std::size_t heads = 4;
  std::size_t d_ff = 64;
  std::size_t blocks = 2;
  /// Quantum feature dimension of the QKSAN kernel.
  std::size_t d_q = 16;
  /// Variational layers of the QASA circuit.
  std::size_t circuit_layers = 2;
  /// QASA: ceil(log2(d_model / heads)); QRWKV: register width.
  std::size_t n_qubits = 3;
  std::size_t max_seq_len = 32;
  std::uint64_t seed = 42;
  /// Context window of the MLP baseline.
  std::size_t window = 3;

  std::size_t head_dim() const { return d_model / heads; }

  /// Desk-scale defaults for `arch` with n_qubits derived accordingly.
  static ModelConfig defaults(Architecture arch, std::size_t vocab_size);

  /// Throws ContractError naming the first violated invariant.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// ceil(log2(width)), at least 1.
std::size_t qasa_qubits(std::size_t head_dim);

}  // namespace qtb
