#pragma once

#include <vector>

#include "qtb/numerics/rng.hpp"
#include "qtb/numerics/tensor.hpp"

namespace qtb::testing {

inline std::vector<double> uniform_values(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Tensor random_param(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  const auto n = shape_size(shape);
  return Tensor::parameter(std::move(shape), uniform_values(rng, n, lo, hi));
}

inline Tensor random_const(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  const auto n = shape_size(shape);
  return Tensor::from(std::move(shape), uniform_values(rng, n, lo, hi));
}

}  // namespace qtb::testing
