#include "qtb/models/layers.hpp"

#include <cmath>
#include <numbers>

#include "qtb/errors.hpp"

namespace qtb {

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  auto y = matmul(x, w);
  return b.defined() ? add(y, b) : y;
}

Tensor classical_attention(const Tensor& q, const Tensor& k, const Tensor& v, Mask mask) {
  if (q.shape() != k.shape() || q.rows() != v.rows())
    throw DimensionError("classical_attention: Q " + shape_string(q.shape()) + ", K " + shape_string(k.shape()) +
                         ", V " + shape_string(v.shape()));
  const auto scores = scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(q.cols())));
  return matmul(masked_softmax_rows(scores, mask), v);
}

namespace {

double inv_frequency(std::size_t i, std::size_t d) {
  return std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(d));
}

}  // namespace

Tensor sinusoidal_encoding(std::size_t n, std::size_t d) {
  if (d % 2 != 0) throw DimensionError("sinusoidal_encoding: d must be even");
  std::vector<double> v(n * d);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double a = static_cast<double>(p) * inv_frequency(i, d);
      v[p * d + 2 * i] = std::sin(a);
      v[p * d + 2 * i + 1] = std::cos(a);
    }
  return Tensor::from({n, d}, std::move(v));
}

std::vector<double> sinusoidal_phases(std::size_t d) {
  std::vector<double> phi(d, 0.0);
  for (std::size_t j = 1; j < d; j += 2) phi[j] = std::numbers::pi / 2;
  return phi;
}

Tensor quantum_positional_encoding(std::size_t n, std::size_t d, const Tensor& omega, const Tensor& phi) {
  if (d % 2 != 0) throw DimensionError("quantum_positional_encoding: d must be even");
  if (omega.size() != 1) throw DimensionError("quantum_positional_encoding: omega must have one element");
  if (phi.size() != d) throw DimensionError("quantum_positional_encoding: phi must have d elements");
  // sin(a) = cos(a - pi/2), so both parities are envelope * cos(omega p + phi + offset).
  std::vector<double> positions(n), envelope(n * d), offset(d, 0.0);
  for (std::size_t j = 1; j < d; j += 2) offset[j] = -std::numbers::pi / 2;
  for (std::size_t p = 0; p < n; ++p) {
    positions[p] = static_cast<double>(p);
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double a = static_cast<double>(p) * inv_frequency(i, d);
      envelope[p * d + 2 * i] = std::sin(a);
      envelope[p * d + 2 * i + 1] = std::cos(a);
    }
  }
  const auto pos = Tensor::from({n, 1}, std::move(positions));
  const auto phase = add(matmul(pos, omega), add(phi, Tensor::from({d}, std::move(offset))));
  return mul(Tensor::from({n, d}, std::move(envelope)), cos(phase));
}

}  // namespace qtb
