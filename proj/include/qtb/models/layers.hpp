#pragma once

#include <cstddef>

#include "qtb/numerics/ops.hpp"
#include "qtb/numerics/tensor.hpp"

namespace qtb {

/// x W + b with W stored fan_in x fan_out. `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b = {});

/// softmax(Q K^T / sqrt(width)) V, width = Q.cols().
Tensor classical_attention(const Tensor& q, const Tensor& k, const Tensor& v, Mask mask);

/// Fixed sinusoidal table: sin(p / 10000^(2i/d)) on even columns, cos on odd.
Tensor sinusoidal_encoding(std::size_t n, std::size_t d);

/// Trainable positional matrix:
///   P[p, 2i]   = sin(p / 10000^(2i/d)) * cos(omega * p + phi[2i])
///   P[p, 2i+1] = cos(p / 10000^(2i/d)) * sin(omega * p + phi[2i+1])
/// `omega` has one element, `phi` has d. d must be even.
Tensor quantum_positional_encoding(std::size_t n, std::size_t d, const Tensor& omega, const Tensor& phi);

/// Initial phases that make quantum_positional_encoding equal the sinusoidal table
/// when omega = 0: 0 on even columns, pi/2 on odd ones.
std::vector<double> sinusoidal_phases(std::size_t d);

/// Logits = H W_o + b_o.
inline Tensor lm_head(const Tensor& h, const Tensor& w, const Tensor& b) { return linear(h, w, b); }

}  // namespace qtb
