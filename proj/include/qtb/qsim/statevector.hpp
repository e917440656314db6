#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qtb::qsim {

using Amplitude = std::complex<double>;

/// Desk-scale cap on register width.
inline constexpr int kMaxQubits = 8;

/// Pure state of an n-qubit register.
///
/// Qubit q corresponds to bit q of the basis index (qubit 0 is the least
/// significant bit). Amplitude slot i of an encoded vector is basis state |i>.
class StateVector {
 public:
  /// |0...0>
  explicit StateVector(int n_qubits);
  StateVector(int n_qubits, std::vector<Amplitude> amplitudes);

  static StateVector basis(int n_qubits, std::size_t index);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  std::span<Amplitude> amplitudes() { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }
  Amplitude& operator[](std::size_t i) { return amplitudes_[i]; }

  double norm_squared() const;

 private:
  int n_qubits_;
  std::vector<Amplitude> amplitudes_;
};

/// Per-qubit Pauli-Z expectations <Z_0> .. <Z_{n-1}>.
using MeasurementVector = std::vector<double>;

/// x / ||x|| in slots 0..d-1, zeros elsewhere. A vector with norm below
/// 1e-12 maps to |0...0>. Throws CapacityError when d > 2^n.
StateVector amplitude_encode(std::span<const double> x, int n_qubits);

MeasurementVector expect_z_all(const StateVector& state);

/// Smallest register holding `width` amplitudes (at least one qubit).
int qubits_for_width(std::size_t width);

}  // namespace qtb::qsim
