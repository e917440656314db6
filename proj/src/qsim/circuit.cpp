#include "qtb/qsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtb/errors.hpp"

namespace qtb::qsim {

CircuitSpec::CircuitSpec(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw CapacityError("CircuitSpec: register width " + std::to_string(n_qubits) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
}

CircuitSpec& CircuitSpec::add(Gate gate) {
  gates_.push_back(gate);
  if (gate.slot >= 0) num_params_ = std::max(num_params_, static_cast<std::size_t>(gate.slot) + 1);
  return *this;
}

std::size_t CircuitSpec::count(GateKind kind) const {
  return static_cast<std::size_t>(std::count_if(gates_.begin(), gates_.end(), [kind](const Gate& g) { return g.kind == kind; }));
}

void CircuitSpec::validate() const {
  std::vector<bool> used(num_params_, false);
  for (std::size_t k = 0; k < gates_.size(); ++k) {
    const Gate& g = gates_[k];
    const auto where = " (gate " + std::to_string(k) + ")";
    if (g.target < 0 || g.target >= n_qubits_) throw IndexError("CircuitSpec: target out of range" + where);
    if (g.kind == GateKind::CNOT) {
      if (g.control < 0 || g.control >= n_qubits_) throw IndexError("CircuitSpec: control out of range" + where);
      if (g.control == g.target) throw ContractError("CircuitSpec: CNOT control equals target" + where);
      if (g.slot >= 0) throw ContractError("CircuitSpec: CNOT cannot carry a parameter slot" + where);
    } else {
      if (g.slot < 0) throw ContractError("CircuitSpec: rotation without a parameter slot" + where);
      used[static_cast<std::size_t>(g.slot)] = true;
    }
  }
  for (std::size_t s = 0; s < used.size(); ++s) {
    if (!used[s]) throw ContractError("CircuitSpec: parameter slots are not contiguous, slot " + std::to_string(s) + " unused");
  }
}

void apply_gate(StateVector& state, const Gate& gate, double angle) {
  const int n = state.n_qubits();
  if (gate.target < 0 || gate.target >= n) throw IndexError("apply_gate: target qubit out of range");
  const std::size_t tmask = std::size_t{1} << gate.target;
  auto amps = state.amplitudes();
  const std::size_t dim = amps.size();

  if (gate.kind == GateKind::CNOT) {
    if (gate.control < 0 || gate.control >= n || gate.control == gate.target) {
      throw IndexError("apply_gate: invalid CNOT control");
    }
    const std::size_t cmask = std::size_t{1} << gate.control;
    for (std::size_t i = 0; i < dim; ++i) {
      if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
    }
    return;
  }

  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const Amplitude minus_is(0.0, -s);
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & tmask) continue;
    const Amplitude a0 = amps[i];
    const Amplitude a1 = amps[i | tmask];
    switch (gate.kind) {
      case GateKind::RX:
        amps[i] = c * a0 + minus_is * a1;
        amps[i | tmask] = minus_is * a0 + c * a1;
        break;
      case GateKind::RY:
        amps[i] = c * a0 - s * a1;
        amps[i | tmask] = s * a0 + c * a1;
        break;
      case GateKind::RZ:
        amps[i] = a0 * Amplitude(c, -s);
        amps[i | tmask] = a1 * Amplitude(c, s);
        break;
      case GateKind::CNOT:
        break;
    }
  }
}

StateVector run_circuit(const CircuitSpec& spec, std::span<const double> params, StateVector input) {
  if (params.size() < spec.num_params()) {
    throw ContractError("run_circuit: " + std::to_string(params.size()) + " parameters for " +
                        std::to_string(spec.num_params()) + " slots");
  }
  if (input.n_qubits() != spec.n_qubits()) throw DimensionError("run_circuit: register width mismatch");
  for (const Gate& g : spec.gates()) {
    apply_gate(input, g, g.slot >= 0 ? params[static_cast<std::size_t>(g.slot)] : 0.0);
  }
  return input;
}

CircuitSpec build_qasa_circuit(int n_qubits, int layers) {
  CircuitSpec spec(n_qubits);
  int slot = 0;
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) spec.add(ry(q, slot++));
    for (int q = 0; q + 1 < n_qubits; ++q) spec.add(cnot(q, q + 1));
  }
  return spec;
}

CircuitSpec build_qrwkv_circuit(int n_qubits) {
  if (n_qubits < 2) throw ContractError("build_qrwkv_circuit: entangling ring needs at least 2 qubits");
  CircuitSpec spec(n_qubits);
  int slot = 0;
  auto rx_column = [&] {
    for (int q = 0; q < n_qubits; ++q) spec.add(rx(q, slot++));
  };
  auto ring = [&] {
    for (int q = 0; q < n_qubits; ++q) spec.add(cnot(q, (q + 1) % n_qubits));
  };
  rx_column();
  rx_column();
  ring();
  rx_column();
  ring();
  return spec;
}

}  // namespace qtb::qsim
