#include "qtb/models/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "qtb/errors.hpp"

namespace qtb {

Tensor ParameterSet::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ContractError("ParameterSet: duplicate parameter '" + name + "'");
  value.set_requires_grad(true);
  entries_.emplace_back(name, value);
  return value;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw ContractError("ParameterSet: no parameter '" + name + "'");
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.second);
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  for (auto& [name, t] : entries_) {
    const auto& src = other.get(name);
    if (src.shape() != t.shape())
      throw DimensionError("ParameterSet: shape mismatch for '" + name + "': " + shape_string(src.shape()) + " vs " +
                           shape_string(t.shape()));
    std::copy(src.data().begin(), src.data().end(), t.mutable_data().begin());
  }
}

std::vector<std::vector<double>> ParameterSet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(e.second.data().begin(), e.second.data().end());
  return out;
}

void ParameterSet::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != entries_.size()) throw DimensionError("ParameterSet: snapshot has wrong parameter count");
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto dst = entries_[i].second.mutable_data();
    if (values[i].size() != dst.size()) throw DimensionError("ParameterSet: snapshot size mismatch for '" + entries_[i].first + "'");
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

Tensor init_uniform(Rng& rng, Shape shape, double lo, double hi) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor init_normal(Rng& rng, Shape shape, double stddev) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = stddev * rng.normal();
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor init_weight(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return init_uniform(rng, {fan_in, fan_out}, -bound, bound);
}

Tensor init_constant(Shape shape, double value) {
  std::vector<double> v(shape_size(shape), value);
  return Tensor::parameter(std::move(shape), std::move(v));
}

}  // namespace qtb
