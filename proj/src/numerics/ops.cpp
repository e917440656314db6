#include "qtb/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

using StoragePtr = std::shared_ptr<detail::Storage>;

void record(const Tensor& out, std::function<void()> backward) {
  Tape::active()->record(out.storage(), std::move(backward));
}

// Accumulate into an input's gradient only when it participates in differentiation.
std::vector<double>* grad_of(const StoragePtr& s) {
  return s->requires_grad ? &s->grad_buffer() : nullptr;
}

struct Broadcast {
  std::size_t rows = 1, cols = 1;
  std::size_t a_rows = 1, a_cols = 1, b_rows = 1, b_cols = 1;
  Shape out;

  std::size_t a_index(std::size_t i, std::size_t j) const {
    return (a_rows == 1 ? 0 : i) * a_cols + (a_cols == 1 ? 0 : j);
  }
  std::size_t b_index(std::size_t i, std::size_t j) const {
    return (b_rows == 1 ? 0 : i) * b_cols + (b_cols == 1 ? 0 : j);
  }
};

std::size_t merge_dim(std::size_t x, std::size_t y, const char* op, const Tensor& a, const Tensor& b) {
  if (x == y || y == 1) return x;
  if (x == 1) return y;
  throw DimensionError(std::string(op) + ": cannot broadcast " + shape_string(a.shape()) + " with " +
                       shape_string(b.shape()));
}

Broadcast broadcast(const Tensor& a, const Tensor& b, const char* op) {
  Broadcast bc;
  bc.a_rows = a.rows();
  bc.a_cols = a.cols();
  bc.b_rows = b.rows();
  bc.b_cols = b.cols();
  bc.rows = merge_dim(bc.a_rows, bc.b_rows, op, a, b);
  bc.cols = merge_dim(bc.a_cols, bc.b_cols, op, a, b);
  const auto rank = std::max(a.rank(), b.rank());
  if (rank == 2)
    bc.out = {bc.rows, bc.cols};
  else if (rank == 1)
    bc.out = {bc.cols};
  if (rank < 2 && bc.rows != 1) bc.out = {bc.rows, bc.cols};
  return bc;
}

enum class BinaryKind { Add, Sub, Mul, Div };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* name) {
  const Broadcast bc = broadcast(a, b, name);
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<double> out(bc.rows * bc.cols);
  for (std::size_t i = 0; i < bc.rows; ++i) {
    for (std::size_t j = 0; j < bc.cols; ++j) {
      const double x = ad[bc.a_index(i, j)];
      const double y = bd[bc.b_index(i, j)];
      double r = 0.0;
      switch (kind) {
        case BinaryKind::Add: r = x + y; break;
        case BinaryKind::Sub: r = x - y; break;
        case BinaryKind::Mul: r = x * y; break;
        case BinaryKind::Div: r = x / y; break;
      }
      out[i * bc.cols + j] = r;
    }
  }
  const bool track = needs_grad({&a, &b});
  Tensor result = make_result(bc.out, std::move(out), track);
  if (track) {
    StoragePtr sa = a.storage(), sb = b.storage(), so = result.storage();
    record(result, [sa, sb, so, bc, kind] {
      auto* ga = grad_of(sa);
      auto* gb = grad_of(sb);
      const auto& g = so->grad;
      for (std::size_t i = 0; i < bc.rows; ++i) {
        for (std::size_t j = 0; j < bc.cols; ++j) {
          const double gij = g[i * bc.cols + j];
          const std::size_t ia = bc.a_index(i, j), ib = bc.b_index(i, j);
          switch (kind) {
            case BinaryKind::Add:
              if (ga) (*ga)[ia] += gij;
              if (gb) (*gb)[ib] += gij;
              break;
            case BinaryKind::Sub:
              if (ga) (*ga)[ia] += gij;
              if (gb) (*gb)[ib] -= gij;
              break;
            case BinaryKind::Mul:
              if (ga) (*ga)[ia] += gij * sb->data[ib];
              if (gb) (*gb)[ib] += gij * sa->data[ia];
              break;
            case BinaryKind::Div: {
              const double y = sb->data[ib];
              if (ga) (*ga)[ia] += gij / y;
              if (gb) (*gb)[ib] -= gij * sa->data[ia] / (y * y);
              break;
            }
          }
        }
      }
    });
  }
  return result;
}

template <typename Forward, typename Derivative>
Tensor unary(const Tensor& x, Forward f, Derivative df) {
  const auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) out[i] = f(xd[i]);
  const bool track = needs_grad({&x});
  Tensor result = make_result(x.shape(), std::move(out), track);
  if (track) {
    StoragePtr sx = x.storage(), so = result.storage();
    record(result, [sx, so, df] {
      auto& gx = sx->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += so->grad[i] * df(sx->data[i], so->data[i]);
    });
  }
  return result;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

double gelu_grad(double x) {
  const double u = kGeluC * (x + kGeluA * x * x * x);
  const double t = std::tanh(u);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

}  // namespace

double gelu_value(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<double> out(m * p, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const double av = ad[i * k + l];
      if (av == 0.0) continue;
      const double* brow = bd.data() + l * p;
      double* orow = out.data() + i * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += av * brow[j];
    }
  }
  const bool track = needs_grad({&a, &b});
  Shape shape = a.rank() == 2 ? Shape{m, p} : Shape{p};
  Tensor result = make_result(std::move(shape), std::move(out), track);
  if (track) {
    StoragePtr sa = a.storage(), sb = b.storage(), so = result.storage();
    record(result, [sa, sb, so, m, k, p] {
      const auto& g = so->grad;
      if (auto* ga = grad_of(sa)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            double acc = 0.0;
            for (std::size_t j = 0; j < p; ++j) acc += g[i * p + j] * sb->data[l * p + j];
            (*ga)[i * k + l] += acc;
          }
      }
      if (auto* gb = grad_of(sb)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            const double av = sa->data[i * k + l];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < p; ++j) (*gb)[l * p + j] += av * g[i * p + j];
          }
      }
    });
  }
  return result;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), p = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<double> out(m * p, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ad[i * k + l] * bd[j * k + l];
      out[i * p + j] = acc;
    }
  const bool track = needs_grad({&a, &b});
  Shape shape = a.rank() == 2 ? Shape{m, p} : Shape{p};
  Tensor result = make_result(std::move(shape), std::move(out), track);
  if (track) {
    StoragePtr sa = a.storage(), sb = b.storage(), so = result.storage();
    record(result, [sa, sb, so, m, k, p] {
      const auto& g = so->grad;
      auto* ga = grad_of(sa);
      auto* gb = grad_of(sb);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) {
          const double gij = g[i * p + j];
          if (gij == 0.0) continue;
          for (std::size_t l = 0; l < k; ++l) {
            if (ga) (*ga)[i * k + l] += gij * sb->data[j * k + l];
            if (gb) (*gb)[j * k + l] += gij * sa->data[i * k + l];
          }
        }
    });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Div, "div"); }

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double offset) {
  return unary(
      x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Tensor activation(const Tensor& x, Activation kind) {
  switch (kind) {
    case Activation::Relu:
      return unary(
          x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::Gelu:
      return unary(x, gelu_value, [](double v, double) { return gelu_grad(v); });
    case Activation::Sigmoid:
      return unary(
          x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
    case Activation::Cosine:
      return unary(
          x, [](double v) { return std::cos(v); }, [](double v, double) { return -std::sin(v); });
    case Activation::Exponential:
      return unary(
          x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
    case Activation::Logarithm:
      for (double v : x.data()) {
        if (!(v > 0.0)) throw DomainError("log: non-positive input " + std::to_string(v));
      }
      return unary(
          x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
  }
  throw ContractError("activation: unknown kind");
}

Tensor clamp_min(const Tensor& x, double floor) {
  return unary(
      x, [floor](double v) { return v > floor ? v : floor; },
      [floor](double v, double) { return v > floor ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  const bool track = needs_grad({&x});
  Tensor result = make_result({}, {total}, track);
  if (track) {
    StoragePtr sx = x.storage(), so = result.storage();
    record(result, [sx, so] {
      auto& gx = sx->grad_buffer();
      for (auto& v : gx) v += so->grad[0];
    });
  }
  return result;
}

Tensor row_sum(const Tensor& x) {
  const std::size_t n = x.rows(), m = x.cols();
  const auto xd = x.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += xd[i * m + j];
  const bool track = needs_grad({&x});
  Tensor result = make_result({n, 1}, std::move(out), track);
  if (track) {
    StoragePtr sx = x.storage(), so = result.storage();
    record(result, [sx, so, n, m] {
      auto& gx = sx->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) gx[i * m + j] += so->grad[i];
    });
  }
  return result;
}

Tensor masked_softmax_rows(const Tensor& scores, Mask mask) {
  const std::size_t n = scores.rows(), m = scores.cols();
  const auto sd = scores.data();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t limit = mask == Mask::Causal ? std::min(i + 1, m) : m;
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < limit; ++j) {
      const double s = sd[i * m + j];
      if (std::isnan(s) || s == std::numeric_limits<double>::infinity()) {
        throw NumericalError("masked_softmax_rows: non-finite score at row " + std::to_string(i) + ", column " +
                             std::to_string(j));
      }
      hi = std::max(hi, s);
    }
    if (!std::isfinite(hi)) throw ContractError("masked_softmax_rows: row " + std::to_string(i) + " is fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < limit; ++j) {
      const double e = std::exp(sd[i * m + j] - hi);
      out[i * m + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < limit; ++j) out[i * m + j] /= total;
  }
  const bool track = needs_grad({&scores});
  Tensor result = make_result(scores.shape(), std::move(out), track);
  if (track) {
    StoragePtr sx = scores.storage(), so = result.storage();
    record(result, [sx, so, n, m] {
      auto& gx = sx->grad_buffer();
      const auto& y = so->data;
      const auto& g = so->grad;
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
        for (std::size_t j = 0; j < m; ++j) gx[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
      }
    });
  }
  return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  const std::size_t n = x.rows(), d = x.cols();
  if (d < 2) throw DimensionError("layer_norm: feature width must be >= 2, got " + shape_string(x.shape()));
  if (gain.size() != d || shift.size() != d) {
    throw DimensionError("layer_norm: gain " + shape_string(gain.shape()) + " / shift " +
                         shape_string(shift.shape()) + " do not match width " + std::to_string(d));
  }
  const auto xd = x.data();
  const auto gd = gain.data();
  const auto bd = shift.data();
  std::vector<double> xhat(n * d), inv(n), out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xd[i * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xd[i * d + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    inv[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (xd[i * d + j] - mean) * inv[i];
      out[i * d + j] = xhat[i * d + j] * gd[j] + bd[j];
    }
  }
  const bool track = needs_grad({&x, &gain, &shift});
  Tensor result = make_result(x.shape(), std::move(out), track);
  if (track) {
    StoragePtr sx = x.storage(), sg = gain.storage(), sb = shift.storage(), so = result.storage();
    record(result, [sx, sg, sb, so, n, d, xhat = std::move(xhat), inv = std::move(inv)] {
      const auto& g = so->grad;
      auto* gx = grad_of(sx);
      auto* gg = grad_of(sg);
      auto* gb = grad_of(sb);
      const double dd = static_cast<double>(d);
      for (std::size_t i = 0; i < n; ++i) {
        double sum_gh = 0.0, sum_gh_xhat = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double gh = g[i * d + j] * sg->data[j];
          sum_gh += gh;
          sum_gh_xhat += gh * xhat[i * d + j];
          if (gg) (*gg)[j] += g[i * d + j] * xhat[i * d + j];
          if (gb) (*gb)[j] += g[i * d + j];
        }
        if (gx) {
          for (std::size_t j = 0; j < d; ++j) {
            const double gh = g[i * d + j] * sg->data[j];
            (*gx)[i * d + j] += inv[i] / dd * (dd * gh - sum_gh - xhat[i * d + j] * sum_gh_xhat);
          }
        }
      }
    });
  }
  return result;
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> targets, std::span<const std::uint8_t> valid) {
  const std::size_t n = logits.rows(), v = logits.cols();
  if (targets.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_string(logits.shape()));
  }
  if (!valid.empty() && valid.size() != n) throw DimensionError("cross_entropy: validity mask length mismatch");
  const auto ld = logits.data();
  std::vector<double> probs(n * v, 0.0);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid.empty() && !valid[i]) continue;
    const auto t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= v) {
      throw IndexError("cross_entropy: target id " + std::to_string(t) + " outside vocabulary of " +
                       std::to_string(v));
    }
    const double* row = ld.data() + i * v;
    const double hi = *std::max_element(row, row + v);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) z += std::exp(row[j] - hi);
    const double lse = hi + std::log(z);
    for (std::size_t j = 0; j < v; ++j) probs[i * v + j] = std::exp(row[j] - lse);
    total += lse - row[t];
    ++count;
  }
  if (count == 0) throw ContractError("cross_entropy: no valid positions");
  const double inv_count = 1.0 / static_cast<double>(count);
  const bool track = needs_grad({&logits});
  Tensor result = make_result({}, {total * inv_count}, track);
  if (track) {
    StoragePtr sx = logits.storage(), so = result.storage();
    std::vector<std::int32_t> tgt(targets.begin(), targets.end());
    std::vector<std::uint8_t> mask(valid.begin(), valid.end());
    record(result, [sx, so, n, v, inv_count, probs = std::move(probs), tgt = std::move(tgt), mask = std::move(mask)] {
      auto& gx = sx->grad_buffer();
      const double g = so->grad[0] * inv_count;
      for (std::size_t i = 0; i < n; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        for (std::size_t j = 0; j < v; ++j) gx[i * v + j] += g * probs[i * v + j];
        gx[i * v + static_cast<std::size_t>(tgt[i])] -= g;
      }
    });
  }
  return result;
}

Tensor embedding(const Tensor& table, std::span<const std::int32_t> ids) {
  const std::size_t vocab = table.rows(), d = table.cols();
  const auto td = table.data();
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw IndexError("embedding: token id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(vocab) + " rows");
    }
    std::copy_n(td.begin() + static_cast<std::ptrdiff_t>(ids[i] * d), d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const bool track = needs_grad({&table});
  Tensor result = make_result({ids.size(), d}, std::move(out), track);
  if (track) {
    StoragePtr st = table.storage(), so = result.storage();
    std::vector<std::int32_t> rows(ids.begin(), ids.end());
    record(result, [st, so, d, rows = std::move(rows)] {
      auto& gt = st->grad_buffer();
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) gt[static_cast<std::size_t>(rows[i]) * d + j] += so->grad[i * d + j];
    });
  }
  return result;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) throw DimensionError("concat_cols: row count mismatch " + shape_string(p.shape()));
    total += p.cols();
  }
  std::vector<double> out(n * total);
  std::size_t offset = 0;
  bool track = false;
  for (const auto& p : parts) {
    const auto pd = p.data();
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * total + offset + j] = pd[i * w + j];
    offset += w;
    track = track || needs_grad({&p});
  }
  Tensor result = make_result({n, total}, std::move(out), track);
  if (track) {
    std::vector<StoragePtr> inputs;
    for (const auto& p : parts) inputs.push_back(p.storage());
    StoragePtr so = result.storage();
    record(result, [inputs = std::move(inputs), so, n, total] {
      std::size_t off = 0;
      for (const auto& s : inputs) {
        const std::size_t w = s->shape.empty() ? 1 : s->shape.back();
        if (auto* g = grad_of(s)) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j) (*g)[i * w + j] += so->grad[i * total + off + j];
        }
        off += w;
      }
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t width) {
  const std::size_t n = x.rows(), m = x.cols();
  if (begin + width > m) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + width) +
                         ") outside " + shape_string(x.shape()));
  }
  const auto xd = x.data();
  std::vector<double> out(n * width);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < width; ++j) out[i * width + j] = xd[i * m + begin + j];
  const bool track = needs_grad({&x});
  Tensor result = make_result({n, width}, std::move(out), track);
  if (track) {
    StoragePtr sx = x.storage(), so = result.storage();
    record(result, [sx, so, n, m, begin, width] {
      auto& gx = sx->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < width; ++j) gx[i * m + begin + j] += so->grad[i * width + j];
    });
  }
  return result;
}

Tensor shift_rows_down(const Tensor& x, std::size_t k) {
  const std::size_t n = x.rows(), m = x.cols();
  const auto xd = x.data();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = k; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = xd[(i - k) * m + j];
  const bool track = needs_grad({&x});
  Tensor result = make_result({n, m}, std::move(out), track);
  if (track) {
    StoragePtr sx = x.storage(), so = result.storage();
    record(result, [sx, so, n, m, k] {
      auto& gx = sx->grad_buffer();
      for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) gx[(i - k) * m + j] += so->grad[i * m + j];
    });
  }
  return result;
}

Tensor decay_scan(const Tensor& v, const Tensor& decay) {
  const std::size_t n = v.rows(), d = v.cols();
  if (decay.size() != d) {
    throw DimensionError("decay_scan: decay " + shape_string(decay.shape()) + " does not match " +
                         shape_string(v.shape()));
  }
  const auto vd = v.data();
  const auto ld = decay.data();
  std::vector<double> out(n * d);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < d; ++j) out[t * d + j] = (t ? ld[j] * out[(t - 1) * d + j] : 0.0) + vd[t * d + j];
  const bool track = needs_grad({&v, &decay});
  Tensor result = make_result({n, d}, std::move(out), track);
  if (track) {
    StoragePtr sv = v.storage(), sl = decay.storage(), so = result.storage();
    record(result, [sv, sl, so, n, d] {
      auto* gv = grad_of(sv);
      auto* gl = grad_of(sl);
      std::vector<double> carry(d, 0.0);
      for (std::size_t t = n; t-- > 0;) {
        for (std::size_t j = 0; j < d; ++j) {
          const double a = so->grad[t * d + j] + (t + 1 < n ? sl->data[j] * carry[j] : 0.0);
          carry[j] = a;
          if (gv) (*gv)[t * d + j] += a;
          if (gl && t > 0) (*gl)[j] += a * so->data[(t - 1) * d + j];
        }
      }
    });
  }
  return result;
}

}  // namespace qtb
