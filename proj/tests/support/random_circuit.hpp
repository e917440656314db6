#pragma once

#include <numbers>

#include "qtb/numerics/rng.hpp"
#include "qtb/qsim/circuit.hpp"

namespace qtb::testing {

/// Random circuit over n qubits with `depth` gates; every rotation gets its
/// own slot so the slot range is contiguous.
inline qsim::CircuitSpec random_circuit(Rng& rng, int n, int depth) {
  qsim::CircuitSpec spec(n);
  int slot = 0;
  for (int k = 0; k < depth; ++k) {
    const auto pick = rng.below(n >= 2 ? 4 : 3);
    const int target = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
    switch (pick) {
      case 0: spec.add(qsim::rx(target, slot++)); break;
      case 1: spec.add(qsim::ry(target, slot++)); break;
      case 2: spec.add(qsim::rz(target, slot++)); break;
      default: {
        int control = static_cast<int>(rng.below(static_cast<std::size_t>(n - 1)));
        if (control >= target) ++control;
        spec.add(qsim::cnot(control, target));
      }
    }
  }
  return spec;
}

inline std::vector<double> random_angles(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& a : v) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return v;
}

}  // namespace qtb::testing
