#pragma once

#include <cstdint>
#include <vector>

#include "qtb/numerics/tensor.hpp"

namespace qtb {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are owned per parameter, in the
/// order the parameters were supplied.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options = {});

  /// One update using the current gradients. Throws ContractError if any
  /// parameter has no gradient buffer.
  void step();
  void zero_grad();

  std::int64_t steps_taken() const { return t_; }
  const AdamOptions& options() const { return options_; }

  // Checkpoint access.
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void restore(std::int64_t t, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v);

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

/// Stateless single update of one parameter, t >= 1.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamOptions& options, std::int64_t t);

}  // namespace qtb
