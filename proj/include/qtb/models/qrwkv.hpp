#pragma once

#include <span>
#include <string>
#include <vector>

#include "qtb/models/model.hpp"
#include "qtb/qsim/circuit.hpp"

namespace qtb {

/// One QRWKV layer. Weights follow the column convention y = W x, so a
/// d_out x d_in matrix maps row inputs through x W^T.
struct QrwkvLayer {
  Tensor enc_w, enc_b;  // n_q x d, n_q: angles of the first RX column from x
  Tensor theta;         // remaining circuit angles
  Tensor w_k, w_v;      // d x d
  Tensor w_r, b_r;      // d x 2d, d
  Tensor log_tau;       // d; lambda = exp(-1 / tau)
  Tensor w1;            // d x n_q, applied to the quantum embedding
  Tensor w2, b1;        // d x d, d
  Tensor w3, b2;        // d x d, d
  Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;  // d_ff x d, d_ff, d x d_ff, d
  Tensor att_q, att_k, att_v;             // d x n_q
  Tensor ln1_gain, ln1_shift, ln2_gain, ln2_shift;

  static QrwkvLayer init(Rng& rng, const ModelConfig& config, const qsim::CircuitSpec& spec);
  void register_in(ParameterSet& params, const std::string& prefix);
};

/// Quantum embedding h_t per row: the circuit starts in |0...0>, the first RX
/// column takes angles enc_w x_t + enc_b, the rest use theta. n x n_q.
Tensor qrwkv_quantum_embedding(const Tensor& x, const QrwkvLayer& layer, const qsim::CircuitSpec& spec);
/// Per-channel decay lambda = exp(-1 / tau), tau = exp(log_tau).
Tensor qrwkv_decay(const QrwkvLayer& layer);
/// r_t * (W^K x_t) * m_t with m_t = lambda m_{t-1} + W^V x_t, m_0 = 0.
Tensor qrwkv_time_mix(const Tensor& x, const QrwkvLayer& layer);
/// W^3 (h'_t * h'_{t-1}) + b^2 with h'_t = GELU(W^1 qemb_t + W^2 MLP(x_t) + b^1), h'_0 = 0.
Tensor qrwkv_channel_mix(const Tensor& x, const Tensor& qemb, const QrwkvLayer& layer);
/// Causal softmax over <q_t, k_s> (unscaled) applied to v; q, k, v are
/// linear readouts of the quantum embedding.
Tensor qrwkv_quantum_attention(const Tensor& qemb, const QrwkvLayer& layer);
/// h = LN(x + time_mix), y = LN(h + channel_mix + attention).
Tensor qrwkv_layer(const Tensor& x, const QrwkvLayer& layer, const qsim::CircuitSpec& spec);

/// Single-step forms over plain vectors, threading the recurrent state.
struct TimeMixStep {
  std::vector<double> y;
  std::vector<double> memory;
};
TimeMixStep qrwkv_time_mix_step(const QrwkvLayer& layer, std::span<const double> x_t, std::span<const double> m_prev);

struct ChannelMixStep {
  std::vector<double> c;
  std::vector<double> hidden;  // h'_t
};
ChannelMixStep qrwkv_channel_mix_step(const QrwkvLayer& layer, const qsim::CircuitSpec& spec, std::span<const double> x_t,
                                      std::span<const double> hidden_prev);

class QrwkvModel : public LanguageModel {
 public:
  explicit QrwkvModel(ModelConfig config);

  const qsim::CircuitSpec& circuit() const { return spec_; }
  std::vector<QrwkvLayer>& layers() { return layers_; }
  const std::vector<QrwkvLayer>& layers() const { return layers_; }
  Tensor embed(std::span<const TokenId> ids) const;

 protected:
  Tensor forward_impl(std::span<const TokenId> ids) const override;

 private:
  qsim::CircuitSpec spec_;
  Tensor embedding_, pos_omega_, pos_phi_;
  std::vector<QrwkvLayer> layers_;
  Tensor w_out_, b_out_;
};

}  // namespace qtb
