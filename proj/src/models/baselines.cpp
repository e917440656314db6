#include "qtb/models/baselines.hpp"

#include "qtb/models/layers.hpp"

namespace qtb {

TransformerBlock TransformerBlock::init(Rng& rng, std::size_t d, std::size_t d_ff) {
  TransformerBlock b;
  b.ln1_gain = init_constant({d}, 1.0);
  b.ln1_shift = init_constant({d}, 0.0);
  b.w_q = init_weight(rng, d, d);
  b.w_k = init_weight(rng, d, d);
  b.w_v = init_weight(rng, d, d);
  b.b_q = init_constant({d}, 0.0);
  b.b_k = init_constant({d}, 0.0);
  b.b_v = init_constant({d}, 0.0);
  b.w_o = init_weight(rng, d, d);
  b.b_o = init_constant({d}, 0.0);
  b.ln2_gain = init_constant({d}, 1.0);
  b.ln2_shift = init_constant({d}, 0.0);
  b.w1 = init_weight(rng, d, d_ff);
  b.b1 = init_constant({d_ff}, 0.0);
  b.w2 = init_weight(rng, d_ff, d);
  b.b2 = init_constant({d}, 0.0);
  return b;
}

void TransformerBlock::register_in(ParameterSet& p, const std::string& prefix) {
  p.add(prefix + "ln1.gain", ln1_gain);
  p.add(prefix + "ln1.shift", ln1_shift);
  p.add(prefix + "attn.w_q", w_q);
  p.add(prefix + "attn.w_k", w_k);
  p.add(prefix + "attn.w_v", w_v);
  p.add(prefix + "attn.b_q", b_q);
  p.add(prefix + "attn.b_k", b_k);
  p.add(prefix + "attn.b_v", b_v);
  p.add(prefix + "attn.w_o", w_o);
  p.add(prefix + "attn.b_o", b_o);
  p.add(prefix + "ln2.gain", ln2_gain);
  p.add(prefix + "ln2.shift", ln2_shift);
  p.add(prefix + "ffn.w1", w1);
  p.add(prefix + "ffn.b1", b1);
  p.add(prefix + "ffn.w2", w2);
  p.add(prefix + "ffn.b2", b2);
}

Tensor transformer_block(const Tensor& x, const TransformerBlock& block, std::size_t heads, Mask mask) {
  const auto normed = layer_norm(x, block.ln1_gain, block.ln1_shift);
  const auto q = linear(normed, block.w_q, block.b_q);
  const auto k = linear(normed, block.w_k, block.b_k);
  const auto v = linear(normed, block.w_v, block.b_v);
  const auto width = x.cols() / heads;
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t a = 0; a < heads; ++a)
    outs.push_back(classical_attention(slice_cols(q, a * width, width), slice_cols(k, a * width, width),
                                       slice_cols(v, a * width, width), mask));
  const auto h = add(x, linear(concat_cols(outs), block.w_o, block.b_o));
  const auto normed2 = layer_norm(h, block.ln2_gain, block.ln2_shift);
  return add(h, linear(relu(linear(normed2, block.w1, block.b1)), block.w2, block.b2));
}

TransformerModel::TransformerModel(ModelConfig config) : LanguageModel(std::move(config)) {
  const auto& c = config_;
  Rng rng(c.seed);
  embedding_ = params_.add("embedding", init_normal(rng, {c.vocab_size, c.d_model}, 1.0));
  for (std::size_t l = 0; l < c.blocks; ++l) {
    blocks_.push_back(TransformerBlock::init(rng, c.d_model, c.d_ff));
    blocks_.back().register_in(params_, "block" + std::to_string(l) + ".");
  }
  lnf_gain_ = params_.add("ln_f.gain", init_constant({c.d_model}, 1.0));
  lnf_shift_ = params_.add("ln_f.shift", init_constant({c.d_model}, 0.0));
  w_out_ = params_.add("lm_head.w", init_weight(rng, c.d_model, c.vocab_size));
  b_out_ = params_.add("lm_head.b", init_constant({c.vocab_size}, 0.0));
}

Tensor TransformerModel::forward_impl(std::span<const TokenId> ids) const {
  auto x = add(embedding(embedding_, ids), sinusoidal_encoding(ids.size(), config_.d_model));
  for (const auto& block : blocks_) x = transformer_block(x, block, config_.heads);
  return lm_head(layer_norm(x, lnf_gain_, lnf_shift_), w_out_, b_out_);
}

MlpModel::MlpModel(ModelConfig config) : LanguageModel(std::move(config)) {
  const auto& c = config_;
  Rng rng(c.seed);
  embedding_ = params_.add("embedding", init_normal(rng, {c.vocab_size, c.d_model}, 1.0));
  w1_ = params_.add("hidden.w", init_weight(rng, c.window * c.d_model, c.d_ff));
  b1_ = params_.add("hidden.b", init_constant({c.d_ff}, 0.0));
  w_out_ = params_.add("lm_head.w", init_weight(rng, c.d_ff, c.vocab_size));
  b_out_ = params_.add("lm_head.b", init_constant({c.vocab_size}, 0.0));
}

Tensor MlpModel::forward_impl(std::span<const TokenId> ids) const {
  const auto e = embedding(embedding_, ids);
  std::vector<Tensor> context;
  context.reserve(config_.window);
  for (std::size_t k = 0; k < config_.window; ++k) context.push_back(k == 0 ? e : shift_rows_down(e, k));
  return lm_head(gelu(linear(concat_cols(context), w1_, b1_)), w_out_, b_out_);
}

}  // namespace qtb
