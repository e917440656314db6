#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qtb {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Storage {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;

  bool has_grad() const { return !grad.empty(); }
  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major float64 array of rank 0, 1 or 2.
///
/// A Tensor is a cheap handle: copies share storage. Values created by an
/// operation while a Tape is active are recorded for reverse-mode
/// differentiation when any input requires a gradient.
///
/// For broadcasting and matrix products a rank-1 tensor of length m behaves
/// as a 1 x m row and a scalar as 1 x 1.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  /// Leaf that accumulates gradients (a trainable parameter).
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  /// Rows/cols of the 2-D view (rank 1 -> 1 x m, rank 0 -> 1 x 1).
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  /// In-place value access; used by optimizers and finite-difference probes.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  /// Allocates (or resets) the gradient buffer to zeros.
  void zero_grad();

  /// Value copy with no gradient history.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }
  const std::shared_ptr<detail::Storage>& storage() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Storage> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape shape, std::vector<double> values, bool requires_grad);

  std::shared_ptr<detail::Storage> node_;
};

/// Ordered record of primitive operations for one forward pass.
///
/// Operations append nodes in execution order, which is a topological order
/// of the computation graph. backward() walks the record once in reverse.
/// Recording happens only into the tape installed on the current thread,
/// so independent training runs on different threads never share state.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Installs a tape as the recording target for the current thread.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  static Tape* active();

  void record(std::shared_ptr<detail::Storage> output, std::function<void()> backward);

  /// Populates gradients of every parameter reachable from `loss`.
  /// Intermediate gradients are recomputed on each call; parameter
  /// gradients accumulate until zero_grad().
  void backward(const Tensor& loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::shared_ptr<detail::Storage> output;
    std::function<void()> backward;
  };
  std::vector<Node> nodes_;
};

/// Builds an operation result; registers gradient tracking only if
/// `requires_grad` and a tape is active.
Tensor make_result(Shape shape, std::vector<double> values, bool requires_grad);

/// True when an op with these inputs must be recorded.
bool needs_grad(std::initializer_list<const Tensor*> inputs);

}  // namespace qtb
