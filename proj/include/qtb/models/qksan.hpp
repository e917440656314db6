#pragma once

#include <string>
#include <vector>

#include "qtb/models/model.hpp"
#include "qtb/numerics/ops.hpp"

namespace qtb {

/// Floor added to the clamped kernel inside the logarithm.
inline constexpr double kKernelEps = 1e-6;

struct QksanHead {
  Tensor w_q, w_k, w_v;  // d x d_h
  Tensor b_q, b_k, b_v;  // d_h
  Tensor mu;             // d_h
  Tensor log_sigma;      // 1
  Tensor omega;          // D_q x d_h
  Tensor phase;          // D_q
  Tensor u_v;            // D_q x d_h
  Tensor w_omega;        // d_h x d_h
  Tensor c_v, b_omega;   // d_h

  static QksanHead init(Rng& rng, std::size_t d, std::size_t d_h, std::size_t d_q);
  void register_in(ParameterSet& params, const std::string& prefix);
};

struct QksanBlock {
  std::vector<QksanHead> heads;
  Tensor w_o, b_o;                         // (h d_h) x d, d
  Tensor w_q, b_q, w_g, b_g, w_phi, b_phi;  // residual gate, d x d and d
  Tensor w1, b1, w_omega, b_omega;         // d x d_ff, d_ff
  Tensor w2, b2;                           // d_ff x d, d
  Tensor ln1_gain, ln1_shift, ln2_gain, ln2_shift;

  static QksanBlock init(Rng& rng, std::size_t d, std::size_t heads, std::size_t d_ff, std::size_t d_q);
  void register_in(ParameterSet& params, const std::string& prefix);
};

/// Row i: exp(-||z_i - mu||^2 / (2 sigma^2)) * cos(z_i Omega^T + b).
Tensor qksan_feature_map(const Tensor& z, const QksanHead& head);

/// Intermediate tensors of one attention head.
struct QksanHeadTrace {
  Tensor q, k, v;
  Tensor scores;        // S = Q K^T / sqrt(d_h)
  Tensor kernel;        // Gamma = Phi(Q) Phi(K)^T
  Tensor scores_tilde;  // S + log(max(Gamma, 0) + eps), before masking
  Tensor weights;       // masked row softmax
  Tensor values;        // V modulated by the value gate
  Tensor output;        // weights x values
};

/// Throws NumericalError naming head and row when a combined score is not finite.
QksanHeadTrace qksan_head_forward(const Tensor& x, const QksanHead& head, Mask mask, std::size_t head_index = 0);
inline Tensor qksan_attention_head(const Tensor& x, const QksanHead& head, Mask mask) {
  return qksan_head_forward(x, head, mask).output;
}

/// Concat of heads projected back to d.
Tensor qksan_multi_head(const Tensor& x, const QksanBlock& block, Mask mask);
/// Z1 = LN(X + F_q(X, MHQA(X))), Z2 = LN(Z1 + FFN(Z1)).
Tensor qksan_block(const Tensor& x, const QksanBlock& block, Mask mask = Mask::Causal);

class QksanModel : public LanguageModel {
 public:
  explicit QksanModel(ModelConfig config);

  std::vector<QksanBlock>& blocks() { return blocks_; }
  const std::vector<QksanBlock>& blocks() const { return blocks_; }
  /// Token embedding plus the trainable positional matrix.
  Tensor embed(std::span<const TokenId> ids) const;

 protected:
  Tensor forward_impl(std::span<const TokenId> ids) const override;

 private:
  Tensor embedding_, pos_omega_, pos_phi_;
  std::vector<QksanBlock> blocks_;
  Tensor w_out_, b_out_;
};

}  // namespace qtb
