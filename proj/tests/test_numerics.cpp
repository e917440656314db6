#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "qtb/errors.hpp"
#include "qtb/numerics/adam.hpp"
#include "qtb/numerics/ops.hpp"
#include "qtb/numerics/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/random_tensors.hpp"

using namespace qtb;
using qtb::testing::gradient_check;
using qtb::testing::random_const;
using qtb::testing::random_param;

namespace {

Tensor backward_of(const std::function<Tensor()>& f) {
  Tape tape;
  Tape::Scope scope(tape);
  Tensor loss = f();
  tape.backward(loss);
  return loss;
}

}  // namespace

TEST_CASE("rng: identical seeds give identical streams, distinct seeds diverge") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    if (i == 0) CHECK(x != c.next_u64());
  }
  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(5) < 5);
  }
}

TEST_CASE("rng: state snapshot resumes the stream") {
  Rng a(1);
  a.next_u64();
  const auto snap = a.state();
  const auto expected = a.next_u64();
  Rng b(999);
  b.set_state(snap);
  CHECK(b.next_u64() == expected);
}

TEST_CASE("matmul: identity and projector") {
  const auto eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  const auto m = Tensor::from({2, 2}, {1, 2, 3, 4});
  const auto r = matmul(eye, m);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{1, 2, 3, 4});

  const auto proj = Tensor::from({2, 2}, {1, 0, 0, 0});
  const auto col = Tensor::from({2, 1}, {5, 7});
  const auto p = matmul(proj, col);
  CHECK(p.at(0, 0) == 5.0);
  CHECK(p.at(1, 0) == 0.0);
}

TEST_CASE("matmul: shape mismatch names both shapes") {
  const auto a = Tensor::zeros({2, 3});
  const auto b = Tensor::zeros({2, 3});
  try {
    (void)matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("matmul: gradient matches finite differences") {
  Rng rng(11);
  auto a = random_param(rng, {3, 4});
  auto b = random_param(rng, {4, 2});
  auto w = random_const(rng, {3, 2});
  const auto r = gradient_check({a, b}, [&] { return sum(mul(matmul(a, b), w)); });
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("broadcast binary ops: gradients over row, column and scalar broadcasts") {
  Rng rng(12);
  auto m = random_param(rng, {3, 4});
  auto row = random_param(rng, {4});
  auto col = random_param(rng, {3, 1});
  auto s = random_param(rng, {}, 0.5, 1.5);
  const auto r = gradient_check({m, row, col, s}, [&] {
    auto x = add(m, row);
    x = mul(x, col);
    x = sub(x, s);
    x = div(x, add_scalar(s, 1.0));
    return sum(mul(x, x));
  });
  CHECK(r.max_rel_error < 1e-6);
  CHECK_THROWS_AS((void)add(Tensor::zeros({3, 4}), Tensor::zeros({2, 4})), DimensionError);
}

TEST_CASE("masked_softmax_rows: fixed values") {
  const auto s = masked_softmax_rows(Tensor::from({1, 2}, {0, 0}), Mask::None);
  CHECK(s.at(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.at(1) == doctest::Approx(0.5).epsilon(1e-15));

  const auto c = masked_softmax_rows(Tensor::from({2, 2}, {3, -1, 0.3, 0.7}), Mask::Causal);
  CHECK(c.at(0, 0) == 1.0);
  CHECK(c.at(0, 1) == 0.0);

  const auto l = masked_softmax_rows(Tensor::from({1, 2}, {std::log(2.0), std::log(1.0)}), Mask::None);
  CHECK(l.at(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(l.at(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("masked_softmax_rows: rows sum to one and masked entries are exactly zero") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = masked_softmax_rows(random_const(rng, {6, 6}, -5, 5), Mask::Causal);
    for (std::size_t i = 0; i < 6; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        total += s.at(i, j);
        if (j > i) CHECK(s.at(i, j) == 0.0);
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)masked_softmax_rows(Tensor::from({1, 2}, {-inf, -inf}), Mask::None), ContractError);
}

TEST_CASE("masked_softmax_rows: gradient") {
  Rng rng(6);
  auto s = random_param(rng, {4, 4});
  auto w = random_const(rng, {4, 4});
  const auto r = gradient_check({s}, [&] { return sum(mul(masked_softmax_rows(s, Mask::Causal), w)); });
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("layer_norm: fixed rows and statistics") {
  const auto gain = Tensor::full({2}, 1.0);
  const auto shift = Tensor::zeros({2});
  const auto c = layer_norm(Tensor::from({1, 2}, {3, 3}), gain, shift);
  CHECK(c.at(0) == 0.0);
  CHECK(c.at(1) == 0.0);
  const auto u = layer_norm(Tensor::from({1, 2}, {1, -1}), gain, shift);
  CHECK(u.at(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(u.at(1) == doctest::Approx(-1.0).epsilon(1e-4));

  Rng rng(3);
  const auto x = random_const(rng, {4, 8});
  const auto y = layer_norm(x, Tensor::full({8}, 1.0), Tensor::zeros({8}));
  for (std::size_t i = 0; i < 4; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 8; ++j) mean += y.at(i, j);
    mean /= 8;
    for (std::size_t j = 0; j < 8; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
    var /= 8;
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }
  CHECK_THROWS_AS((void)layer_norm(Tensor::zeros({2, 1}), Tensor::zeros({1}), Tensor::zeros({1})), DimensionError);
}

TEST_CASE("layer_norm: gradient w.r.t. input, gain and shift") {
  Rng rng(8);
  auto x = random_param(rng, {3, 5});
  auto g = random_param(rng, {5});
  auto b = random_param(rng, {5});
  auto w = random_const(rng, {3, 5});
  const auto r = gradient_check({x, g, b}, [&] { return sum(mul(layer_norm(x, g, b), w)); });
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("activations: values, domain and gradients") {
  CHECK(sigmoid(Tensor::scalar(0)).item() == 0.5);
  CHECK(cos(Tensor::scalar(0)).item() == 1.0);
  auto neg = Tensor::parameter({}, {-3.0});
  backward_of([&] { return relu(neg); });
  CHECK(relu(neg).item() == 0.0);
  CHECK(neg.grad()[0] == 0.0);
  CHECK_THROWS_AS((void)log(Tensor::from({2}, {1.0, 0.0})), DomainError);
  CHECK_THROWS_AS((void)log(Tensor::scalar(-1.0)), DomainError);
  CHECK(gelu_value(0.0) == 0.0);

  Rng rng(9);
  for (auto kind : {Activation::Relu, Activation::Gelu, Activation::Sigmoid, Activation::Cosine, Activation::Exponential}) {
    auto x = random_param(rng, {2, 3});
    const auto r = gradient_check({x}, [&] { return sum(mul(activation(x, kind), activation(x, kind))); });
    CHECK(r.max_rel_error < 1e-6);
  }
  auto pos = random_param(rng, {2, 3}, 0.5, 2.0);
  CHECK(gradient_check({pos}, [&] { return sum(log(pos)); }).max_rel_error < 1e-6);
}

TEST_CASE("cross_entropy: uniform, saturated and brute-force cases") {
  const std::vector<std::int32_t> targets{0, 7, 44};
  const auto uniform = cross_entropy(Tensor::zeros({3, 45}), targets);
  CHECK(std::abs(uniform.item() - std::log(45.0)) < 1e-12);

  std::vector<double> sat(2 * 4, 0.0);
  sat[0 * 4 + 2] = 1e6;
  sat[1 * 4 + 1] = 1e6;
  const std::vector<std::int32_t> sat_targets{2, 1};
  CHECK(cross_entropy(Tensor::from({2, 4}, sat), sat_targets).item() == doctest::Approx(0.0));

  Rng rng(4);
  const auto logits = random_const(rng, {3, 5}, -3, 3);
  const std::vector<std::int32_t> t{4, 0, 2};
  double oracle = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 5; ++j) z += std::exp(logits.at(i, j));
    oracle += -std::log(std::exp(logits.at(i, static_cast<std::size_t>(t[i]))) / z);
  }
  oracle /= 3.0;
  CHECK(std::abs(cross_entropy(logits, t).item() - oracle) < 1e-10);

  const std::vector<std::uint8_t> valid{1, 0, 1};
  double masked_oracle = 0.0;
  for (std::size_t i : {0, 2}) {
    double z = 0.0;
    for (std::size_t j = 0; j < 5; ++j) z += std::exp(logits.at(i, j));
    masked_oracle += std::log(z) - logits.at(i, static_cast<std::size_t>(t[i]));
  }
  CHECK(std::abs(cross_entropy(logits, t, valid).item() - masked_oracle / 2.0) < 1e-10);

  const std::vector<std::int32_t> bad{0, 5, 1};
  CHECK_THROWS_AS((void)cross_entropy(logits, bad), IndexError);
}

TEST_CASE("cross_entropy: gradient with validity mask") {
  Rng rng(14);
  auto logits = random_param(rng, {4, 6});
  const std::vector<std::int32_t> t{1, 5, 0, 3};
  const std::vector<std::uint8_t> valid{1, 1, 0, 1};
  CHECK(gradient_check({logits}, [&] { return cross_entropy(logits, t, valid); }).max_rel_error < 1e-6);
}

TEST_CASE("backward: sum and quadratic") {
  auto x = Tensor::parameter({2, 3}, {1, 2, 3, 4, 5, 6});
  backward_of([&] { return sum(x); });
  for (double g : x.grad()) CHECK(g == 1.0);

  auto q = Tensor::parameter({2}, {1, 2});
  backward_of([&] { return sum(mul(q, q)); });
  CHECK(q.grad()[0] == 2.0);
  CHECK(q.grad()[1] == 4.0);
}

TEST_CASE("backward: accumulation, unreachable tensors, scalar contract") {
  auto x = Tensor::parameter({2}, {1, 2});
  auto unused = Tensor::parameter({2}, {5, 5});
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = sum(mul(x, x));
    (void)add(unused, unused);
    tape.backward(loss);
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == 4.0);
  CHECK(x.grad()[1] == 8.0);
  CHECK_FALSE(unused.has_grad());

  Tape::Scope scope(tape);
  Tensor not_scalar = add(x, x);
  CHECK_THROWS_AS(tape.backward(not_scalar), ContractError);
  tape.clear();
  CHECK(tape.size() == 0);
}

TEST_CASE("no recording without an active tape") {
  auto x = Tensor::parameter({2}, {1, 2});
  const auto y = mul(x, x);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("structural ops: embedding, concat, slice, shift, row_sum gradients") {
  Rng rng(21);
  auto table = random_param(rng, {5, 3});
  auto other = random_param(rng, {4, 2});
  auto w = random_const(rng, {4, 5});
  const std::vector<std::int32_t> ids{4, 0, 4, 2};
  const auto r = gradient_check({table, other}, [&] {
    auto e = embedding(table, ids);
    std::vector<Tensor> parts{e, shift_rows_down(other, 1)};
    auto c = concat_cols(parts);
    auto s = slice_cols(c, 1, 4);
    auto rs = row_sum(mul(s, s));
    return add(sum(mul(matmul(s, Tensor::full({4, 5}, 0.5)), w)), sum(rs));
  });
  CHECK(r.max_rel_error < 1e-6);
  CHECK_THROWS_AS((void)embedding(table, std::vector<std::int32_t>{5}), IndexError);
  const auto shifted = shift_rows_down(Tensor::from({3, 1}, {1, 2, 3}), 2);
  CHECK(shifted.at(0, 0) == 0.0);
  CHECK(shifted.at(2, 0) == 1.0);
}

TEST_CASE("decay_scan: recurrence values and gradient") {
  const auto v = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6});
  const auto lam = Tensor::from({2}, {0.5, 1.0});
  const auto m = decay_scan(v, lam);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 0) == 3.5);
  CHECK(m.at(2, 0) == 6.75);
  CHECK(m.at(2, 1) == 12.0);

  Rng rng(31);
  auto vp = random_param(rng, {4, 3});
  auto lp = random_param(rng, {3}, 0.1, 0.9);
  auto w = random_const(rng, {4, 3});
  CHECK(gradient_check({vp, lp}, [&] { return sum(mul(decay_scan(vp, lp), w)); }).max_rel_error < 1e-6);
}

TEST_CASE("adam: zero gradient, first step magnitude, 1-D convergence") {
  auto p = Tensor::parameter({3}, {1, 2, 3});
  Adam opt({p});
  opt.zero_grad();
  opt.step();
  CHECK(p.data()[0] == 1.0);
  CHECK(p.data()[2] == 3.0);

  auto s = Tensor::parameter({}, {0.0});
  Adam one({s}, {.learning_rate = 0.01});
  s.zero_grad();
  s.storage()->grad[0] = 1.0;
  one.step();
  CHECK(s.item() == doctest::Approx(-0.01).epsilon(1e-6));

  auto theta = Tensor::parameter({}, {0.0});
  Adam opt1d({theta}, {.learning_rate = 0.1});
  for (int i = 0; i < 100; ++i) {
    opt1d.zero_grad();
    Tape tape;
    Tape::Scope scope(tape);
    auto diff = add_scalar(theta, -3.0);
    tape.backward(mul(diff, diff));
    opt1d.step();
  }
  CHECK(std::abs(theta.item() - 3.0) < 0.1);
}

TEST_CASE("adam: missing gradient is a contract error") {
  auto p = Tensor::parameter({2}, {1, 2});
  Adam opt({p});
  CHECK_THROWS_AS(opt.step(), ContractError);
  std::vector<double> g(2, 0.0), m(2, 0.0), v(2, 0.0);
  CHECK_THROWS_AS(adam_update(p.mutable_data(), g, m, v, {}, 0), ContractError);
}

TEST_CASE("determinism: the same seed reproduces a loss trajectory bit for bit") {
  auto run = [] {
    Rng rng(99);
    auto w = random_param(rng, {4, 3});
    auto x = random_const(rng, {5, 4});
    const std::vector<std::int32_t> t{0, 1, 2, 1, 0};
    Adam opt({w});
    std::vector<double> losses;
    for (int i = 0; i < 10; ++i) {
      opt.zero_grad();
      Tape tape;
      Tape::Scope scope(tape);
      auto loss = cross_entropy(matmul(x, w), t);
      losses.push_back(loss.item());
      tape.backward(loss);
      opt.step();
    }
    return losses;
  };
  CHECK(run() == run());
}
