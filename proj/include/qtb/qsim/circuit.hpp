#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qtb/qsim/statevector.hpp"

namespace qtb::qsim {

enum class GateKind { RX, RY, RZ, CNOT };

struct Gate {
  GateKind kind;
  int target;
  int control = -1;  // CNOT only
  int slot = -1;     // parameter index, rotations only

  bool is_rotation() const { return kind != GateKind::CNOT; }
};

inline Gate rx(int target, int slot) { return {GateKind::RX, target, -1, slot}; }
inline Gate ry(int target, int slot) { return {GateKind::RY, target, -1, slot}; }
inline Gate rz(int target, int slot) { return {GateKind::RZ, target, -1, slot}; }
inline Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, -1}; }

/// Ordered gate list over a fixed register with parameter slots 0..P-1.
class CircuitSpec {
 public:
  explicit CircuitSpec(int n_qubits);

  CircuitSpec& add(Gate gate);

  int n_qubits() const { return n_qubits_; }
  std::span<const Gate> gates() const { return gates_; }
  /// One past the highest slot in use.
  std::size_t num_params() const { return num_params_; }
  std::size_t count(GateKind kind) const;

  /// Throws IndexError / ContractError when qubit indices are out of range,
  /// a CNOT has control == target or carries a slot, or the slots used do
  /// not form the contiguous range 0..P-1.
  void validate() const;

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
  std::size_t num_params_ = 0;
};

/// Applies one gate in place; `angle` is ignored for CNOT.
void apply_gate(StateVector& state, const Gate& gate, double angle = 0.0);

StateVector run_circuit(const CircuitSpec& spec, std::span<const double> params, StateVector input);

/// L layers of [RY on every qubit, then CNOT i -> i+1 for i < n-1].
CircuitSpec build_qasa_circuit(int n_qubits, int layers);

/// Two RX columns, CNOT ring i -> (i+1) mod n, one RX column, second CNOT ring.
/// Slots 0..n-1 belong to the first column (used for input re-uploading by the
/// model), slots n..3n-1 to the trainable columns.
CircuitSpec build_qrwkv_circuit(int n_qubits);

}  // namespace qtb::qsim
