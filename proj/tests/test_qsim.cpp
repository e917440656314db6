#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qtb/errors.hpp"
#include "qtb/numerics/ops.hpp"
#include "qtb/qsim/circuit.hpp"
#include "qtb/qsim/vqc.hpp"
#include "support/dense_unitary.hpp"
#include "support/gradcheck.hpp"
#include "support/random_circuit.hpp"
#include "support/random_tensors.hpp"

using namespace qtb;
using namespace qtb::qsim;
using std::numbers::pi;

TEST_CASE("amplitude_encode: normalisation, padding and degenerate input") {
  const auto s = amplitude_encode(std::vector<double>{3, 4}, 1);
  CHECK(s[0].real() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(s[1].real() == doctest::Approx(0.8).epsilon(1e-15));

  const auto zero = amplitude_encode(std::vector<double>{0, 0}, 1);
  CHECK(zero[0] == Amplitude(1.0));
  CHECK(zero[1] == Amplitude(0.0));

  const auto flat = amplitude_encode(std::vector<double>{1, 1, 1, 1}, 2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(flat[i].real() == doctest::Approx(0.5).epsilon(1e-15));

  const auto padded = amplitude_encode(std::vector<double>{1, 2, 2}, 2);
  CHECK(padded[3] == Amplitude(0.0));
  CHECK(std::abs(padded.norm_squared() - 1.0) < 1e-12);

  CHECK_THROWS_AS((void)amplitude_encode(std::vector<double>{1, 2, 3}, 1), CapacityError);
  CHECK_THROWS_AS((void)StateVector(kMaxQubits + 1), CapacityError);
}

TEST_CASE("apply_gate: textbook cases") {
  StateVector s(1);
  apply_gate(s, ry(0, 0), pi);
  CHECK(expect_z_all(s)[0] == doctest::Approx(-1.0));

  // Basis index 1 has qubit 0 set; CNOT(0 -> 1) moves it to index 3.
  auto b = StateVector::basis(2, 1);
  apply_gate(b, cnot(0, 1));
  CHECK(std::abs(b[3] - Amplitude(1.0)) < 1e-15);

  for (double theta : {0.0, 0.3, 1.7, 4.0}) {
    StateVector z(1);
    apply_gate(z, rz(0, 0), theta);
    CHECK(expect_z_all(z)[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  StateVector bad(2);
  CHECK_THROWS_AS(apply_gate(bad, rx(2, 0), 0.1), IndexError);
}

TEST_CASE("run_circuit: identity parameters and equator state") {
  const auto spec = build_qasa_circuit(3, 2);
  const std::vector<double> zeros(spec.num_params(), 0.0);
  const auto out = run_circuit(spec, zeros, StateVector(3));
  CHECK(out[0] == Amplitude(1.0));

  CircuitSpec single(1);
  single.add(ry(0, 0));
  const auto eq = run_circuit(single, std::vector<double>{pi / 2}, StateVector(1));
  CHECK(std::abs(expect_z_all(eq)[0]) < 1e-12);

  CHECK_THROWS_AS((void)run_circuit(spec, std::vector<double>{0.1}, StateVector(3)), ContractError);
}

TEST_CASE("run_circuit matches the dense unitary product on random 4-qubit circuits") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = testing::random_circuit(rng, 4, 24);
    const auto params = testing::random_angles(rng, spec.num_params());
    std::vector<double> x(16);
    for (auto& v : x) v = rng.uniform(-1, 1);
    const auto input = amplitude_encode(x, 4);
    const auto fast = run_circuit(spec, params, input);
    const auto dense = testing::apply(testing::circuit_unitary(spec, params),
                                      std::vector<Amplitude>(input.amplitudes().begin(), input.amplitudes().end()));
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(fast[i] - dense[i]) < 1e-10);
    CHECK(std::abs(fast.norm_squared() - 1.0) < 1e-12);
  }
}

TEST_CASE("expect_z_all: basis, uniform and Bell states") {
  for (double z : expect_z_all(StateVector(3))) CHECK(z == 1.0);
  const auto uniform = amplitude_encode(std::vector<double>{1, 1, 1, 1}, 2);
  for (double z : expect_z_all(uniform)) CHECK(std::abs(z) < 1e-15);
  const auto bell = amplitude_encode(std::vector<double>{1, 0, 0, 1}, 2);
  for (double z : expect_z_all(bell)) CHECK(std::abs(z) < 1e-15);
}

TEST_CASE("circuit builders: gate counts and invariants") {
  const auto qasa = build_qasa_circuit(3, 2);
  CHECK(qasa.count(GateKind::RY) == 6);
  CHECK(qasa.count(GateKind::CNOT) == 4);
  CHECK(qasa.num_params() == 6);
  CHECK_NOTHROW(qasa.validate());

  const auto qrwkv = build_qrwkv_circuit(4);
  CHECK(qrwkv.count(GateKind::RX) == 12);
  CHECK(qrwkv.count(GateKind::CNOT) == 8);
  CHECK(qrwkv.num_params() == 12);
  CHECK_NOTHROW(qrwkv.validate());
  // The ring closes on the last qubit.
  CHECK(qrwkv.gates()[11].control == 3);
  CHECK(qrwkv.gates()[11].target == 0);

  CircuitSpec gap(2);
  gap.add(rx(0, 1));
  CHECK_THROWS_AS(gap.validate(), ContractError);
  CircuitSpec self(2);
  self.add(cnot(1, 1));
  CHECK_THROWS_AS(self.validate(), ContractError);
  CircuitSpec range(2);
  range.add(ry(5, 0));
  CHECK_THROWS_AS(range.validate(), IndexError);
}

TEST_CASE("vqc: identity circuit reads out the encoded distribution") {
  // Zero angles make a rotation-only circuit the identity. (Zero angles do not
  // remove CNOTs, which permute basis states.)
  CircuitSpec spec(2);
  spec.add(ry(0, 0)).add(rx(1, 1)).add(rz(0, 2));
  const std::vector<double> params(spec.num_params(), 0.0);
  const std::vector<double> x{0.5, -1.0, 2.0, 0.25};
  const auto z = vqc_measure(spec, params, x);
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  for (int q = 0; q < 2; ++q) {
    double expected = 0.0;
    for (std::size_t b = 0; b < 4; ++b) expected += (((b >> q) & 1U) ? -1.0 : 1.0) * x[b] * x[b] / norm2;
    CHECK(z[static_cast<std::size_t>(q)] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("param_shift_grad: closed form for a single RY") {
  CircuitSpec spec(1);
  spec.add(ry(0, 0));
  const std::vector<double> x{1.0};
  CHECK(param_shift_grad(spec, std::vector<double>{pi / 3}, x, 0)[0] == doctest::Approx(-std::sqrt(3.0) / 2).epsilon(1e-14));
  CHECK(std::abs(param_shift_grad(spec, std::vector<double>{0.0}, x, 0)[0]) < 1e-15);
}

TEST_CASE("param_shift_grad agrees with finite differences on random 3-qubit circuits") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = testing::random_circuit(rng, 3, 15);
    auto params = testing::random_angles(rng, spec.num_params());
    std::vector<double> x(8);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (int out = 0; out < 3; ++out) {
      const auto shift = param_shift_grad(spec, params, x, out);
      for (std::size_t j = 0; j < params.size(); ++j) {
        const double h = 1e-5, saved = params[j];
        params[j] = saved + h;
        const double up = vqc_measure(spec, params, x)[static_cast<std::size_t>(out)];
        params[j] = saved - h;
        const double down = vqc_measure(spec, params, x)[static_cast<std::size_t>(out)];
        params[j] = saved;
        CHECK(std::abs(shift[j] - (up - down) / (2 * h)) < 1e-8);
      }
    }
  }
}

TEST_CASE("vqc_vjp: parameter gradients equal the shift rule, input gradients equal finite differences") {
  Rng rng(78);
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = testing::random_circuit(rng, 3, 18);
    const auto params = testing::random_angles(rng, spec.num_params());
    std::vector<double> x(7);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (int out = 0; out < 3; ++out) {
      std::vector<double> upstream(3, 0.0);
      upstream[static_cast<std::size_t>(out)] = 1.0;
      const auto adj = vqc_vjp(spec, params, x, upstream);
      const auto shift = param_shift_grad(spec, params, x, out);
      for (std::size_t j = 0; j < shift.size(); ++j) CHECK(std::abs(adj.params[j] - shift[j]) < 1e-8);
      for (std::size_t i = 0; i < x.size(); ++i) {
        auto xp = x, xm = x;
        xp[i] += 1e-5;
        xm[i] -= 1e-5;
        const double numeric =
            (vqc_measure(spec, params, xp)[static_cast<std::size_t>(out)] - vqc_measure(spec, params, xm)[static_cast<std::size_t>(out)]) / 2e-5;
        CHECK(testing::relative_error(adj.input[i], numeric) < 1e-5);
      }
    }
  }
}

TEST_CASE("vqc_forward: tensor op with shared and per-row parameters") {
  Rng rng(90);
  const auto spec = build_qrwkv_circuit(3);
  auto shared = testing::random_param(rng, {spec.num_params()}, 0, 6.28);
  auto per_row = testing::random_param(rng, {2, spec.num_params()}, 0, 6.28);
  auto x = testing::random_param(rng, {2, 6});
  auto w = testing::random_const(rng, {2, 3});
  CHECK(testing::gradient_check({shared, x}, [&] { return sum(mul(vqc_forward(spec, shared, x), w)); }).max_rel_error < 1e-5);
  CHECK(testing::gradient_check({per_row, x}, [&] { return sum(mul(vqc_forward(spec, per_row, x), w)); }).max_rel_error < 1e-5);
  const auto y = vqc_forward(spec, shared, x);
  for (double v : y.data()) {
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
  CHECK_THROWS_AS((void)vqc_forward(spec, testing::random_const(rng, {3, spec.num_params()}), x), DimensionError);
}
