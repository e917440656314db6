#include "qtb/models/qrwkv.hpp"

#include <cmath>
#include <numbers>

#include "qtb/errors.hpp"
#include "qtb/models/layers.hpp"
#include "qtb/numerics/ops.hpp"
#include "qtb/qsim/vqc.hpp"

namespace qtb {

namespace {

// x W^T + b
Tensor project(const Tensor& x, const Tensor& w, const Tensor& b = {}) {
  auto y = matmul_nt(x, w);
  return b.defined() ? add(y, b) : y;
}

// W v + b over plain vectors; W is rows x cols row-major.
std::vector<double> matvec(const Tensor& w, std::span<const double> v, const Tensor& b = {}) {
  const auto rows = w.rows(), cols = w.cols();
  if (v.size() != cols) throw DimensionError("qrwkv: vector of " + std::to_string(v.size()) + " for " + shape_string(w.shape()));
  std::vector<double> out(rows, 0.0);
  const auto wd = w.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b.defined() ? b.at(r) : 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wd[r * cols + c] * v[c];
    out[r] = acc;
  }
  return out;
}

double sigmoid_value(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

QrwkvLayer QrwkvLayer::init(Rng& rng, const ModelConfig& c, const qsim::CircuitSpec& spec) {
  QrwkvLayer l;
  const auto d = c.d_model, nq = c.n_qubits;
  auto weight = [&](std::size_t out, std::size_t in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    return init_uniform(rng, {out, in}, -bound, bound);
  };
  l.enc_w = weight(nq, d);
  l.enc_b = init_constant({nq}, 0.0);
  l.theta = init_uniform(rng, {spec.num_params() - nq}, 0.0, 2.0 * std::numbers::pi);
  l.w_k = weight(d, d);
  l.w_v = weight(d, d);
  l.w_r = weight(d, 2 * d);
  l.b_r = init_constant({d}, 0.0);
  // Time constants spread over [1, 8] steps.
  std::vector<double> log_tau(d);
  for (std::size_t j = 0; j < d; ++j)
    log_tau[j] = std::log(1.0 + 7.0 * static_cast<double>(j) / static_cast<double>(std::max<std::size_t>(d - 1, 1)));
  l.log_tau = Tensor::parameter({d}, std::move(log_tau));
  l.w1 = weight(d, nq);
  l.w2 = weight(d, d);
  l.b1 = init_constant({d}, 0.0);
  l.w3 = weight(d, d);
  l.b2 = init_constant({d}, 0.0);
  l.mlp_w1 = weight(c.d_ff, d);
  l.mlp_b1 = init_constant({c.d_ff}, 0.0);
  l.mlp_w2 = weight(d, c.d_ff);
  l.mlp_b2 = init_constant({d}, 0.0);
  l.att_q = weight(d, nq);
  l.att_k = weight(d, nq);
  l.att_v = weight(d, nq);
  l.ln1_gain = init_constant({d}, 1.0);
  l.ln1_shift = init_constant({d}, 0.0);
  l.ln2_gain = init_constant({d}, 1.0);
  l.ln2_shift = init_constant({d}, 0.0);
  return l;
}

void QrwkvLayer::register_in(ParameterSet& p, const std::string& prefix) {
  p.add(prefix + "vqc.enc_w", enc_w);
  p.add(prefix + "vqc.enc_b", enc_b);
  p.add(prefix + "vqc.theta", theta);
  p.add(prefix + "time.w_k", w_k);
  p.add(prefix + "time.w_v", w_v);
  p.add(prefix + "time.w_r", w_r);
  p.add(prefix + "time.b_r", b_r);
  p.add(prefix + "time.log_tau", log_tau);
  p.add(prefix + "channel.w1", w1);
  p.add(prefix + "channel.w2", w2);
  p.add(prefix + "channel.b1", b1);
  p.add(prefix + "channel.w3", w3);
  p.add(prefix + "channel.b2", b2);
  p.add(prefix + "channel.mlp_w1", mlp_w1);
  p.add(prefix + "channel.mlp_b1", mlp_b1);
  p.add(prefix + "channel.mlp_w2", mlp_w2);
  p.add(prefix + "channel.mlp_b2", mlp_b2);
  p.add(prefix + "attn.w_q", att_q);
  p.add(prefix + "attn.w_k", att_k);
  p.add(prefix + "attn.w_v", att_v);
  p.add(prefix + "ln1.gain", ln1_gain);
  p.add(prefix + "ln1.shift", ln1_shift);
  p.add(prefix + "ln2.gain", ln2_gain);
  p.add(prefix + "ln2.shift", ln2_shift);
}

Tensor qrwkv_quantum_embedding(const Tensor& x, const QrwkvLayer& layer, const qsim::CircuitSpec& spec) {
  const auto n = x.rows();
  const auto angles = project(x, layer.enc_w, layer.enc_b);
  const auto trained = add(Tensor::zeros({n, layer.theta.size()}), layer.theta);
  const std::vector<Tensor> parts{angles, trained};
  return qsim::vqc_forward(spec, concat_cols(parts), Tensor::full({n, 1}, 1.0));
}

Tensor qrwkv_decay(const QrwkvLayer& layer) { return exp(scale(exp(scale(layer.log_tau, -1.0)), -1.0)); }

Tensor qrwkv_time_mix(const Tensor& x, const QrwkvLayer& layer) {
  const auto u = project(x, layer.w_k);
  const auto memory = decay_scan(project(x, layer.w_v), qrwkv_decay(layer));
  const std::vector<Tensor> gate_in{x, shift_rows_down(memory, 1)};
  const auto r = sigmoid(project(concat_cols(gate_in), layer.w_r, layer.b_r));
  return mul(r, mul(u, memory));
}

Tensor qrwkv_channel_mix(const Tensor& x, const Tensor& qemb, const QrwkvLayer& layer) {
  const auto mlp = project(gelu(project(x, layer.mlp_w1, layer.mlp_b1)), layer.mlp_w2, layer.mlp_b2);
  const auto z = add(add(project(qemb, layer.w1), project(mlp, layer.w2)), layer.b1);
  const auto hidden = gelu(z);
  return project(mul(hidden, shift_rows_down(hidden, 1)), layer.w3, layer.b2);
}

Tensor qrwkv_quantum_attention(const Tensor& qemb, const QrwkvLayer& layer) {
  const auto q = project(qemb, layer.att_q);
  const auto k = project(qemb, layer.att_k);
  const auto v = project(qemb, layer.att_v);
  return matmul(masked_softmax_rows(matmul_nt(q, k), Mask::Causal), v);
}

Tensor qrwkv_layer(const Tensor& x, const QrwkvLayer& layer, const qsim::CircuitSpec& spec) {
  const auto qemb = qrwkv_quantum_embedding(x, layer, spec);
  const auto h = layer_norm(add(x, qrwkv_time_mix(x, layer)), layer.ln1_gain, layer.ln1_shift);
  const auto mixed = add(add(h, qrwkv_channel_mix(x, qemb, layer)), qrwkv_quantum_attention(qemb, layer));
  return layer_norm(mixed, layer.ln2_gain, layer.ln2_shift);
}

TimeMixStep qrwkv_time_mix_step(const QrwkvLayer& layer, std::span<const double> x_t, std::span<const double> m_prev) {
  const auto u = matvec(layer.w_k, x_t);
  const auto v = matvec(layer.w_v, x_t);
  const auto d = u.size();
  if (m_prev.size() != d) throw DimensionError("qrwkv_time_mix_step: memory width mismatch");
  std::vector<double> joined(x_t.begin(), x_t.end());
  joined.insert(joined.end(), m_prev.begin(), m_prev.end());
  const auto gate = matvec(layer.w_r, joined, layer.b_r);
  TimeMixStep out{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    const double lambda = std::exp(-1.0 / std::exp(layer.log_tau.at(j)));
    out.memory[j] = lambda * m_prev[j] + v[j];
    out.y[j] = sigmoid_value(gate[j]) * u[j] * out.memory[j];
  }
  return out;
}

ChannelMixStep qrwkv_channel_mix_step(const QrwkvLayer& layer, const qsim::CircuitSpec& spec, std::span<const double> x_t,
                                      std::span<const double> hidden_prev) {
  auto params = matvec(layer.enc_w, x_t, layer.enc_b);
  params.insert(params.end(), layer.theta.data().begin(), layer.theta.data().end());
  const std::vector<double> ground{1.0};
  const auto qemb = qsim::vqc_measure(spec, params, ground);

  auto inner = matvec(layer.mlp_w1, x_t, layer.mlp_b1);
  for (auto& v : inner) v = gelu_value(v);
  const auto mlp = matvec(layer.mlp_w2, inner, layer.mlp_b2);
  const auto a = matvec(layer.w1, qemb);
  const auto b = matvec(layer.w2, mlp, layer.b1);
  const auto d = a.size();
  if (hidden_prev.size() != d) throw DimensionError("qrwkv_channel_mix_step: hidden width mismatch");
  ChannelMixStep out{{}, std::vector<double>(d)};
  std::vector<double> product(d);
  for (std::size_t j = 0; j < d; ++j) {
    out.hidden[j] = gelu_value(a[j] + b[j]);
    product[j] = out.hidden[j] * hidden_prev[j];
  }
  out.c = matvec(layer.w3, product, layer.b2);
  return out;
}

QrwkvModel::QrwkvModel(ModelConfig config)
    : LanguageModel(std::move(config)), spec_(qsim::build_qrwkv_circuit(static_cast<int>(config_.n_qubits))) {
  const auto& c = config_;
  Rng rng(c.seed);
  embedding_ = params_.add("embedding", init_normal(rng, {c.vocab_size, c.d_model}, 1.0));
  pos_omega_ = params_.add("pos.omega", init_constant({1}, 0.0));
  pos_phi_ = params_.add("pos.phi", Tensor::parameter({c.d_model}, sinusoidal_phases(c.d_model)));
  for (std::size_t l = 0; l < c.blocks; ++l) {
    layers_.push_back(QrwkvLayer::init(rng, c, spec_));
    layers_.back().register_in(params_, "layer" + std::to_string(l) + ".");
  }
  w_out_ = params_.add("lm_head.w", init_weight(rng, c.d_model, c.vocab_size));
  b_out_ = params_.add("lm_head.b", init_constant({c.vocab_size}, 0.0));
}

Tensor QrwkvModel::embed(std::span<const TokenId> ids) const {
  return add(embedding(embedding_, ids), quantum_positional_encoding(ids.size(), config_.d_model, pos_omega_, pos_phi_));
}

Tensor QrwkvModel::forward_impl(std::span<const TokenId> ids) const {
  auto x = embed(ids);
  for (const auto& layer : layers_) x = qrwkv_layer(x, layer, spec_);
  return lm_head(x, w_out_, b_out_);
}

}  // namespace qtb
