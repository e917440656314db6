#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qtb/numerics/tensor.hpp"

namespace qtb {

// Matrix products. Rank-1 operands are treated as rows.
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T without materialising the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Elementwise binary ops with 2-D broadcasting: each operand dimension must
// equal the result dimension or be 1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);

enum class Activation { Relu, Gelu, Sigmoid, Cosine, Exponential, Logarithm };

/// Elementwise activation. Gelu is the tanh approximation.
/// Logarithm throws DomainError on non-positive input.
Tensor activation(const Tensor& x, Activation kind);
inline Tensor relu(const Tensor& x) { return activation(x, Activation::Relu); }
inline Tensor gelu(const Tensor& x) { return activation(x, Activation::Gelu); }
inline Tensor sigmoid(const Tensor& x) { return activation(x, Activation::Sigmoid); }
inline Tensor cos(const Tensor& x) { return activation(x, Activation::Cosine); }
inline Tensor exp(const Tensor& x) { return activation(x, Activation::Exponential); }
inline Tensor log(const Tensor& x) { return activation(x, Activation::Logarithm); }

double gelu_value(double x);

/// max(x, floor); the gradient is passed only where x > floor.
Tensor clamp_min(const Tensor& x, double floor);

Tensor sum(const Tensor& x);
/// Sum over columns, result n x 1.
Tensor row_sum(const Tensor& x);

enum class Mask { None, Causal };

/// Row softmax. With Mask::Causal entries j > i are excluded and come out exactly 0.
Tensor masked_softmax_rows(const Tensor& scores, Mask mask);

/// Per-row normalisation to zero mean and unit variance followed by gain/shift.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps = 1e-5);

/// Mean negative log-likelihood over positions where `valid` is non-zero
/// (all positions when `valid` is empty).
Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> targets,
                     std::span<const std::uint8_t> valid = {});

/// Gathers table rows: result[i] = table[ids[i]].
Tensor embedding(const Tensor& table, std::span<const std::int32_t> ids);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t width);

/// result[i] = x[i - k] for i >= k, zero rows above.
Tensor shift_rows_down(const Tensor& x, std::size_t k);

/// Exponential-decay scan along rows: m[t] = decay * m[t-1] + v[t], m[-1] = 0.
/// `decay` is a row of per-channel factors.
Tensor decay_scan(const Tensor& v, const Tensor& decay);

}  // namespace qtb
