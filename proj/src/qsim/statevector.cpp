#include "qtb/qsim/statevector.hpp"

#include <cmath>
#include <string>

#include "qtb/errors.hpp"

namespace qtb::qsim {

namespace {

void check_width(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw CapacityError("StateVector: register width " + std::to_string(n_qubits) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  check_width(n_qubits);
  amplitudes_.assign(std::size_t{1} << n_qubits, Amplitude{});
  amplitudes_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<Amplitude> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_width(n_qubits);
  if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
    throw DimensionError("StateVector: " + std::to_string(amplitudes_.size()) + " amplitudes for " +
                         std::to_string(n_qubits) + " qubits");
  }
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
  StateVector s(n_qubits);
  if (index >= s.dimension()) throw IndexError("StateVector::basis: index out of range");
  s[0] = 0.0;
  s[index] = 1.0;
  return s;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

int qubits_for_width(std::size_t width) {
  int n = 1;
  while ((std::size_t{1} << n) < width) ++n;
  return n;
}

StateVector amplitude_encode(std::span<const double> x, int n_qubits) {
  StateVector state(n_qubits);
  if (x.size() > state.dimension()) {
    throw CapacityError("amplitude_encode: " + std::to_string(x.size()) + " values do not fit into " +
                        std::to_string(n_qubits) + " qubits");
  }
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (norm < 1e-12) return state;
  state[0] = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) state[i] = x[i] / norm;
  return state;
}

MeasurementVector expect_z_all(const StateVector& state) {
  MeasurementVector z(static_cast<std::size_t>(state.n_qubits()), 0.0);
  for (std::size_t b = 0; b < state.dimension(); ++b) {
    const double p = std::norm(state[b]);
    for (int q = 0; q < state.n_qubits(); ++q) z[static_cast<std::size_t>(q)] += ((b >> q) & 1U) ? -p : p;
  }
  return z;
}

}  // namespace qtb::qsim
