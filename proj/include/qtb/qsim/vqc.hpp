#pragma once

#include <span>
#include <vector>

#include "qtb/numerics/tensor.hpp"
#include "qtb/qsim/circuit.hpp"

namespace qtb::qsim {

/// encode -> run -> measure for one input vector.
MeasurementVector vqc_measure(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x);

struct VqcGradient {
  std::vector<double> params;  // d(upstream . <Z>) / d params
  std::vector<double> input;   // d(upstream . <Z>) / d x
};

/// Vector-Jacobian product of vqc_measure by adjoint differentiation: one
/// forward sweep, then a reverse sweep that uncomputes the state while
/// pulling the observable sum_i upstream_i Z_i back through each gate, and
/// finally through the amplitude normalisation.
VqcGradient vqc_vjp(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x,
                    std::span<const double> upstream);

/// d<Z_output>/d params by the two-term shift rule, shifting each gate
/// individually by +-pi/2 and summing over gates that share a slot.
std::vector<double> param_shift_grad(const CircuitSpec& spec, std::span<const double> params,
                                     std::span<const double> x, int output_index);

/// Differentiable VQC over the rows of `inputs` (n x k, or a single row).
/// `params` is either one shared vector of length P or an n x P matrix of
/// per-row parameters. Returns n x n_qubits expectations.
Tensor vqc_forward(const CircuitSpec& spec, const Tensor& params, const Tensor& inputs);

}  // namespace qtb::qsim
