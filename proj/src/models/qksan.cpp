#include "qtb/models/qksan.hpp"

#include <cmath>
#include <numbers>

#include "qtb/errors.hpp"
#include "qtb/models/layers.hpp"

namespace qtb {

QksanHead QksanHead::init(Rng& rng, std::size_t d, std::size_t d_h, std::size_t d_q) {
  QksanHead h;
  h.w_q = init_weight(rng, d, d_h);
  h.w_k = init_weight(rng, d, d_h);
  h.w_v = init_weight(rng, d, d_h);
  h.b_q = init_constant({d_h}, 0.0);
  h.b_k = init_constant({d_h}, 0.0);
  h.b_v = init_constant({d_h}, 0.0);
  h.mu = init_constant({d_h}, 0.0);
  h.log_sigma = init_constant({1}, 0.0);
  h.omega = init_normal(rng, {d_q, d_h}, 1.0 / std::sqrt(static_cast<double>(d_h)));
  h.phase = init_uniform(rng, {d_q}, 0.0, 2.0 * std::numbers::pi);
  h.u_v = init_weight(rng, d_q, d_h);
  h.w_omega = init_weight(rng, d_h, d_h);
  h.c_v = init_constant({d_h}, 0.0);
  h.b_omega = init_constant({d_h}, 0.0);
  return h;
}

void QksanHead::register_in(ParameterSet& p, const std::string& prefix) {
  p.add(prefix + "w_q", w_q);
  p.add(prefix + "w_k", w_k);
  p.add(prefix + "w_v", w_v);
  p.add(prefix + "b_q", b_q);
  p.add(prefix + "b_k", b_k);
  p.add(prefix + "b_v", b_v);
  p.add(prefix + "mu", mu);
  p.add(prefix + "log_sigma", log_sigma);
  p.add(prefix + "omega", omega);
  p.add(prefix + "phase", phase);
  p.add(prefix + "u_v", u_v);
  p.add(prefix + "w_omega", w_omega);
  p.add(prefix + "c_v", c_v);
  p.add(prefix + "b_omega", b_omega);
}

QksanBlock QksanBlock::init(Rng& rng, std::size_t d, std::size_t heads, std::size_t d_ff, std::size_t d_q) {
  QksanBlock b;
  const auto d_h = d / heads;
  for (std::size_t a = 0; a < heads; ++a) b.heads.push_back(QksanHead::init(rng, d, d_h, d_q));
  b.w_o = init_weight(rng, heads * d_h, d);
  b.b_o = init_constant({d}, 0.0);
  b.w_q = init_weight(rng, d, d);
  b.b_q = init_constant({d}, 0.0);
  b.w_g = init_weight(rng, d, d);
  b.b_g = init_constant({d}, 0.0);
  b.w_phi = init_weight(rng, d, d);
  b.b_phi = init_constant({d}, 0.0);
  b.w1 = init_weight(rng, d, d_ff);
  b.b1 = init_constant({d_ff}, 0.0);
  b.w_omega = init_weight(rng, d, d_ff);
  b.b_omega = init_constant({d_ff}, 0.0);
  b.w2 = init_weight(rng, d_ff, d);
  b.b2 = init_constant({d}, 0.0);
  b.ln1_gain = init_constant({d}, 1.0);
  b.ln1_shift = init_constant({d}, 0.0);
  b.ln2_gain = init_constant({d}, 1.0);
  b.ln2_shift = init_constant({d}, 0.0);
  return b;
}

void QksanBlock::register_in(ParameterSet& p, const std::string& prefix) {
  for (std::size_t a = 0; a < heads.size(); ++a) heads[a].register_in(p, prefix + "head" + std::to_string(a) + ".");
  p.add(prefix + "w_o", w_o);
  p.add(prefix + "b_o", b_o);
  p.add(prefix + "gate.w_q", w_q);
  p.add(prefix + "gate.b_q", b_q);
  p.add(prefix + "gate.w_g", w_g);
  p.add(prefix + "gate.b_g", b_g);
  p.add(prefix + "gate.w_phi", w_phi);
  p.add(prefix + "gate.b_phi", b_phi);
  p.add(prefix + "ffn.w1", w1);
  p.add(prefix + "ffn.b1", b1);
  p.add(prefix + "ffn.w_omega", w_omega);
  p.add(prefix + "ffn.b_omega", b_omega);
  p.add(prefix + "ffn.w2", w2);
  p.add(prefix + "ffn.b2", b2);
  p.add(prefix + "ln1.gain", ln1_gain);
  p.add(prefix + "ln1.shift", ln1_shift);
  p.add(prefix + "ln2.gain", ln2_gain);
  p.add(prefix + "ln2.shift", ln2_shift);
}

Tensor qksan_feature_map(const Tensor& z, const QksanHead& head) {
  const auto centred = sub(z, head.mu);
  // 1 / (2 sigma^2) = 0.5 * exp(-2 log sigma)
  const auto inv_two_var = scale(exp(scale(head.log_sigma, -2.0)), 0.5);
  const auto envelope = exp(scale(mul(row_sum(mul(centred, centred)), inv_two_var), -1.0));
  return mul(envelope, cos(add(matmul_nt(z, head.omega), head.phase)));
}

QksanHeadTrace qksan_head_forward(const Tensor& x, const QksanHead& head, Mask mask, std::size_t head_index) {
  QksanHeadTrace t;
  t.q = linear(x, head.w_q, head.b_q);
  t.k = linear(x, head.w_k, head.b_k);
  t.v = linear(x, head.w_v, head.b_v);
  const auto d_h = static_cast<double>(t.q.cols());
  t.scores = scale(matmul_nt(t.q, t.k), 1.0 / std::sqrt(d_h));
  t.kernel = matmul_nt(qksan_feature_map(t.q, head), qksan_feature_map(t.k, head));
  t.scores_tilde = add(t.scores, log(add_scalar(clamp_min(t.kernel, 0.0), kKernelEps)));

  const auto n = t.scores_tilde.rows();
  const auto s = t.scores_tilde.data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t last = mask == Mask::Causal ? i + 1 : n;
    for (std::size_t j = 0; j < last; ++j)
      if (!std::isfinite(s[i * n + j]))
        throw NumericalError("QKSAN head " + std::to_string(head_index) + " row " + std::to_string(i) +
                             ": non-finite attention score");
  }
  t.weights = masked_softmax_rows(t.scores_tilde, mask);

  const auto gate = mul(sigmoid(add(matmul(qksan_feature_map(t.v, head), head.u_v), head.c_v)),
                        cos(add(matmul_nt(t.v, head.w_omega), head.b_omega)));
  t.values = mul(t.v, gate);
  t.output = matmul(t.weights, t.values);
  return t;
}

Tensor qksan_multi_head(const Tensor& x, const QksanBlock& block, Mask mask) {
  std::vector<Tensor> outs;
  outs.reserve(block.heads.size());
  for (std::size_t a = 0; a < block.heads.size(); ++a) outs.push_back(qksan_head_forward(x, block.heads[a], mask, a).output);
  return linear(concat_cols(outs), block.w_o, block.b_o);
}

Tensor qksan_block(const Tensor& x, const QksanBlock& block, Mask mask) {
  const auto y = qksan_multi_head(x, block, mask);
  const auto gate = mul(sigmoid(linear(x, block.w_g, block.b_g)), cos(linear(x, block.w_phi, block.b_phi)));
  const auto enhanced = mul(relu(linear(y, block.w_q, block.b_q)), gate);
  const auto z1 = layer_norm(add(x, enhanced), block.ln1_gain, block.ln1_shift);
  const auto hidden = mul(relu(linear(z1, block.w1, block.b1)), cos(linear(z1, block.w_omega, block.b_omega)));
  return layer_norm(add(z1, linear(hidden, block.w2, block.b2)), block.ln2_gain, block.ln2_shift);
}

QksanModel::QksanModel(ModelConfig config) : LanguageModel(std::move(config)) {
  const auto& c = config_;
  Rng rng(c.seed);
  embedding_ = params_.add("embedding", init_normal(rng, {c.vocab_size, c.d_model}, 1.0));
  pos_omega_ = params_.add("pos.omega", init_constant({1}, 0.0));
  pos_phi_ = params_.add("pos.phi", Tensor::parameter({c.d_model}, sinusoidal_phases(c.d_model)));
  for (std::size_t l = 0; l < c.blocks; ++l) {
    blocks_.push_back(QksanBlock::init(rng, c.d_model, c.heads, c.d_ff, c.d_q));
    blocks_.back().register_in(params_, "block" + std::to_string(l) + ".");
  }
  w_out_ = params_.add("lm_head.w", init_weight(rng, c.d_model, c.vocab_size));
  b_out_ = params_.add("lm_head.b", init_constant({c.vocab_size}, 0.0));
}

Tensor QksanModel::embed(std::span<const TokenId> ids) const {
  return add(embedding(embedding_, ids), quantum_positional_encoding(ids.size(), config_.d_model, pos_omega_, pos_phi_));
}

Tensor QksanModel::forward_impl(std::span<const TokenId> ids) const {
  auto x = embed(ids);
  for (const auto& block : blocks_) x = qksan_block(x, block, Mask::Causal);
  return lm_head(x, w_out_, b_out_);
}

}  // namespace qtb
