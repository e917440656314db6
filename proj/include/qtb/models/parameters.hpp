#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qtb/numerics/rng.hpp"
#include "qtb/numerics/tensor.hpp"

namespace qtb {

/// Ordered registry of named trainable tensors. Registration order is the
/// checkpoint and optimizer order.
class ParameterSet {
 public:
  /// Marks `value` trainable and returns the registered handle. Throws
  /// ContractError on a duplicate name.
  Tensor add(const std::string& name, Tensor value);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  std::size_t size() const { return entries_.size(); }
  /// Total number of scalars.
  std::size_t scalar_count() const;
  void zero_grad();

  /// Copies values element-wise from `other`, matching by name and shape.
  void copy_values_from(const ParameterSet& other);
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Initialisers. Weights default to U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor init_uniform(Rng& rng, Shape shape, double lo, double hi);
Tensor init_normal(Rng& rng, Shape shape, double stddev);
Tensor init_weight(Rng& rng, std::size_t fan_in, std::size_t fan_out);
Tensor init_constant(Shape shape, double value);

}  // namespace qtb
