#pragma once

#include <array>
#include <string>
#include <vector>

#include "qtb/models/model.hpp"
#include "qtb/numerics/ops.hpp"
#include "qtb/qsim/circuit.hpp"

namespace qtb {

/// One attention block. Every head owns three circuits (query, key, value)
/// over the same topology; each reads its head's slice of the input by
/// amplitude encoding and returns n_qubits Z expectations.
struct QasaBlock {
  std::vector<std::array<Tensor, 3>> circuit_params;  // per head: q, k, v angle vectors
  Tensor w_o, b_o;                                    // (heads * n_qubits) x d, d
  Tensor ln1_gain, ln1_shift;
  Tensor w1, b1, w2, b2;                              // decoder d -> d_ff -> d
  Tensor ln2_gain, ln2_shift;

  static QasaBlock init(Rng& rng, const ModelConfig& config, const qsim::CircuitSpec& spec);
  void register_in(ParameterSet& params, const std::string& prefix);
};

/// Per-head quantum attention: Q, K, V from the circuits, then causal scaled
/// dot-product attention over the measurement vectors. Output n x (heads * n_qubits).
Tensor qasa_attention(const Tensor& x, const QasaBlock& block, const qsim::CircuitSpec& spec, std::size_t heads,
                      Mask mask = Mask::Causal);
/// H = LN(X + Attn W_O + b_O); Z = LN(H + GELU(H W1 + b1) W2 + b2).
Tensor qasa_block(const Tensor& x, const QasaBlock& block, const qsim::CircuitSpec& spec, std::size_t heads,
                  Mask mask = Mask::Causal);

class QasaModel : public LanguageModel {
 public:
  explicit QasaModel(ModelConfig config);

  const qsim::CircuitSpec& circuit() const { return spec_; }
  std::vector<QasaBlock>& blocks() { return blocks_; }
  const std::vector<QasaBlock>& blocks() const { return blocks_; }

 protected:
  Tensor forward_impl(std::span<const TokenId> ids) const override;

 private:
  qsim::CircuitSpec spec_;
  Tensor embedding_, pos_omega_, pos_phi_;
  std::vector<QasaBlock> blocks_;
  Tensor w_out_, b_out_;
};

}  // namespace qtb
