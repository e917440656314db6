#pragma once

#include <string>
#include <vector>

#include "qtb/models/model.hpp"
#include "qtb/numerics/ops.hpp"

namespace qtb {

struct TransformerBlock {
  Tensor ln1_gain, ln1_shift;
  Tensor w_q, w_k, w_v, b_q, b_k, b_v;  // d x d, d
  Tensor w_o, b_o;
  Tensor ln2_gain, ln2_shift;
  Tensor w1, b1, w2, b2;  // d x d_ff, d_ff, d_ff x d, d

  static TransformerBlock init(Rng& rng, std::size_t d, std::size_t d_ff);
  void register_in(ParameterSet& params, const std::string& prefix);
};

/// Pre-LN block: x + MHA(LN(x)), then + ReLU FFN(LN(.)).
Tensor transformer_block(const Tensor& x, const TransformerBlock& block, std::size_t heads, Mask mask = Mask::Causal);

/// Causal multi-head scaled dot-product attention with fixed sinusoidal
/// positions and a final LayerNorm before the output head.
class TransformerModel : public LanguageModel {
 public:
  explicit TransformerModel(ModelConfig config);
  const std::vector<TransformerBlock>& blocks() const { return blocks_; }

 protected:
  Tensor forward_impl(std::span<const TokenId> ids) const override;

 private:
  Tensor embedding_;
  std::vector<TransformerBlock> blocks_;
  Tensor lnf_gain_, lnf_shift_, w_out_, b_out_;
};

/// Concatenated embeddings of the `window` most recent tokens (zero rows
/// before the sequence start), one GELU hidden layer, then logits.
class MlpModel : public LanguageModel {
 public:
  explicit MlpModel(ModelConfig config);

 protected:
  Tensor forward_impl(std::span<const TokenId> ids) const override;

 private:
  Tensor embedding_, w1_, b1_, w_out_, b_out_;
};

}  // namespace qtb
