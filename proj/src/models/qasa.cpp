#include "qtb/models/qasa.hpp"

#include <numbers>

#include "qtb/models/layers.hpp"
#include "qtb/qsim/vqc.hpp"

namespace qtb {

QasaBlock QasaBlock::init(Rng& rng, const ModelConfig& c, const qsim::CircuitSpec& spec) {
  QasaBlock b;
  const auto p = spec.num_params();
  for (std::size_t a = 0; a < c.heads; ++a) {
    b.circuit_params.push_back({init_uniform(rng, {p}, 0.0, 2.0 * std::numbers::pi),
                                init_uniform(rng, {p}, 0.0, 2.0 * std::numbers::pi),
                                init_uniform(rng, {p}, 0.0, 2.0 * std::numbers::pi)});
  }
  b.w_o = init_weight(rng, c.heads * c.n_qubits, c.d_model);
  b.b_o = init_constant({c.d_model}, 0.0);
  b.ln1_gain = init_constant({c.d_model}, 1.0);
  b.ln1_shift = init_constant({c.d_model}, 0.0);
  b.w1 = init_weight(rng, c.d_model, c.d_ff);
  b.b1 = init_constant({c.d_ff}, 0.0);
  b.w2 = init_weight(rng, c.d_ff, c.d_model);
  b.b2 = init_constant({c.d_model}, 0.0);
  b.ln2_gain = init_constant({c.d_model}, 1.0);
  b.ln2_shift = init_constant({c.d_model}, 0.0);
  return b;
}

void QasaBlock::register_in(ParameterSet& p, const std::string& prefix) {
  static const char* kRoles[] = {"q", "k", "v"};
  for (std::size_t a = 0; a < circuit_params.size(); ++a)
    for (std::size_t r = 0; r < 3; ++r)
      p.add(prefix + "head" + std::to_string(a) + ".vqc_" + kRoles[r], circuit_params[a][r]);
  p.add(prefix + "w_o", w_o);
  p.add(prefix + "b_o", b_o);
  p.add(prefix + "ln1.gain", ln1_gain);
  p.add(prefix + "ln1.shift", ln1_shift);
  p.add(prefix + "ffn.w1", w1);
  p.add(prefix + "ffn.b1", b1);
  p.add(prefix + "ffn.w2", w2);
  p.add(prefix + "ffn.b2", b2);
  p.add(prefix + "ln2.gain", ln2_gain);
  p.add(prefix + "ln2.shift", ln2_shift);
}

Tensor qasa_attention(const Tensor& x, const QasaBlock& block, const qsim::CircuitSpec& spec, std::size_t heads,
                      Mask mask) {
  const auto width = x.cols() / heads;
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t a = 0; a < heads; ++a) {
    const auto slice = slice_cols(x, a * width, width);
    const auto& theta = block.circuit_params[a];
    const auto q = qsim::vqc_forward(spec, theta[0], slice);
    const auto k = qsim::vqc_forward(spec, theta[1], slice);
    const auto v = qsim::vqc_forward(spec, theta[2], slice);
    outs.push_back(classical_attention(q, k, v, mask));
  }
  return concat_cols(outs);
}

Tensor qasa_block(const Tensor& x, const QasaBlock& block, const qsim::CircuitSpec& spec, std::size_t heads, Mask mask) {
  const auto attn = linear(qasa_attention(x, block, spec, heads, mask), block.w_o, block.b_o);
  const auto h = layer_norm(add(x, attn), block.ln1_gain, block.ln1_shift);
  const auto ff = linear(gelu(linear(h, block.w1, block.b1)), block.w2, block.b2);
  return layer_norm(add(h, ff), block.ln2_gain, block.ln2_shift);
}

QasaModel::QasaModel(ModelConfig config)
    : LanguageModel(std::move(config)),
      spec_(qsim::build_qasa_circuit(static_cast<int>(config_.n_qubits), static_cast<int>(config_.circuit_layers))) {
  const auto& c = config_;
  Rng rng(c.seed);
  embedding_ = params_.add("embedding", init_normal(rng, {c.vocab_size, c.d_model}, 1.0));
  pos_omega_ = params_.add("pos.omega", init_constant({1}, 0.0));
  pos_phi_ = params_.add("pos.phi", Tensor::parameter({c.d_model}, sinusoidal_phases(c.d_model)));
  for (std::size_t l = 0; l < c.blocks; ++l) {
    blocks_.push_back(QasaBlock::init(rng, c, spec_));
    blocks_.back().register_in(params_, "block" + std::to_string(l) + ".");
  }
  w_out_ = params_.add("lm_head.w", init_weight(rng, c.d_model, c.vocab_size));
  b_out_ = params_.add("lm_head.b", init_constant({c.vocab_size}, 0.0));
}

Tensor QasaModel::forward_impl(std::span<const TokenId> ids) const {
  auto x = add(embedding(embedding_, ids), quantum_positional_encoding(ids.size(), config_.d_model, pos_omega_, pos_phi_));
  for (const auto& block : blocks_) x = qasa_block(x, block, spec_, config_.heads);
  return lm_head(x, w_out_, b_out_);
}

}  // namespace qtb
