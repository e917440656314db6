#include "qtb/qsim/vqc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qtb/errors.hpp"

namespace qtb::qsim {

namespace {

std::vector<double> gate_angles(const CircuitSpec& spec, std::span<const double> params) {
  if (params.size() < spec.num_params()) {
    throw ContractError("vqc: " + std::to_string(params.size()) + " parameters for " +
                        std::to_string(spec.num_params()) + " slots");
  }
  std::vector<double> angles;
  angles.reserve(spec.gates().size());
  for (const Gate& g : spec.gates()) angles.push_back(g.slot >= 0 ? params[static_cast<std::size_t>(g.slot)] : 0.0);
  return angles;
}

StateVector run_angles(const CircuitSpec& spec, std::span<const double> angles, StateVector state) {
  const auto gates = spec.gates();
  for (std::size_t k = 0; k < gates.size(); ++k) apply_gate(state, gates[k], angles[k]);
  return state;
}

void apply_inverse(StateVector& state, const Gate& gate, double angle) { apply_gate(state, gate, -angle); }

double input_norm(std::span<const double> x) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  return std::sqrt(n2);
}

}  // namespace

MeasurementVector vqc_measure(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x) {
  return expect_z_all(run_circuit(spec, params, amplitude_encode(x, spec.n_qubits())));
}

VqcGradient vqc_vjp(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x,
                    std::span<const double> upstream) {
  const int n = spec.n_qubits();
  if (upstream.size() != static_cast<std::size_t>(n)) throw DimensionError("vqc_vjp: upstream length != qubit count");
  const auto angles = gate_angles(spec, params);
  const auto gates = spec.gates();

  StateVector phi = run_angles(spec, angles, amplitude_encode(x, n));

  // lambda = O phi with O = sum_q upstream_q Z_q (diagonal).
  StateVector lambda = phi;
  for (std::size_t b = 0; b < lambda.dimension(); ++b) {
    double o = 0.0;
    for (int q = 0; q < n; ++q) o += ((b >> q) & 1U) ? -upstream[static_cast<std::size_t>(q)] : upstream[static_cast<std::size_t>(q)];
    lambda[b] *= o;
  }

  VqcGradient grad;
  grad.params.assign(spec.num_params(), 0.0);
  for (std::size_t k = gates.size(); k-- > 0;) {
    const Gate& g = gates[k];
    apply_inverse(phi, g, angles[k]);
    if (g.is_rotation()) {
      // dR(t)/dt = R(t + pi) / 2, so d<O>/dt = Re<lambda| R(t + pi) |phi_{k-1}>.
      StateVector mu = phi;
      apply_gate(mu, g, angles[k] + std::numbers::pi);
      double acc = 0.0;
      for (std::size_t b = 0; b < mu.dimension(); ++b) acc += (std::conj(lambda[b]) * mu[b]).real();
      grad.params[static_cast<std::size_t>(g.slot)] += acc;
    }
    apply_inverse(lambda, g, angles[k]);
  }

  // d<O>/d psi0 = 2 Re(U^dagger O U psi0) for a real input state, then
  // through psi0 = x / ||x||.
  grad.input.assign(x.size(), 0.0);
  const double norm = input_norm(x);
  if (norm < 1e-12) return grad;
  double dot = 0.0;
  std::vector<double> g_psi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g_psi[i] = 2.0 * lambda[i].real();
    dot += g_psi[i] * x[i] / norm;
  }
  for (std::size_t i = 0; i < x.size(); ++i) grad.input[i] = (g_psi[i] - dot * x[i] / norm) / norm;
  return grad;
}

std::vector<double> param_shift_grad(const CircuitSpec& spec, std::span<const double> params,
                                     std::span<const double> x, int output_index) {
  if (output_index < 0 || output_index >= spec.n_qubits()) throw IndexError("param_shift_grad: output index out of range");
  for (const Gate& g : spec.gates()) {
    if (g.slot >= 0 && !g.is_rotation()) throw ContractError("param_shift_grad: parameter slot feeds a non-rotation gate");
  }
  const auto angles = gate_angles(spec, params);
  const auto input = amplitude_encode(x, spec.n_qubits());
  const auto gates = spec.gates();
  const auto out = static_cast<std::size_t>(output_index);

  std::vector<double> grad(spec.num_params(), 0.0);
  for (std::size_t k = 0; k < gates.size(); ++k) {
    if (gates[k].slot < 0) continue;
    auto shifted = angles;
    shifted[k] = angles[k] + std::numbers::pi / 2.0;
    const double plus = expect_z_all(run_angles(spec, shifted, input))[out];
    shifted[k] = angles[k] - std::numbers::pi / 2.0;
    const double minus = expect_z_all(run_angles(spec, shifted, input))[out];
    grad[static_cast<std::size_t>(gates[k].slot)] += (plus - minus) / 2.0;
  }
  return grad;
}

Tensor vqc_forward(const CircuitSpec& spec, const Tensor& params, const Tensor& inputs) {
  const std::size_t n = inputs.rows(), width = inputs.cols();
  const std::size_t nq = static_cast<std::size_t>(spec.n_qubits());
  const std::size_t p = params.cols();
  const bool shared = params.rows() == 1;
  if (!shared && params.rows() != n) {
    throw DimensionError("vqc_forward: per-row parameters " + shape_string(params.shape()) + " for inputs " +
                         shape_string(inputs.shape()));
  }
  if (p < spec.num_params()) throw ContractError("vqc_forward: parameter vector shorter than circuit slot count");

  const auto pd = params.data();
  const auto xd = inputs.data();
  std::vector<double> out(n * nq);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row_params = pd.subspan(shared ? 0 : i * p, p);
    const auto z = vqc_measure(spec, row_params, xd.subspan(i * width, width));
    std::copy(z.begin(), z.end(), out.begin() + static_cast<std::ptrdiff_t>(i * nq));
  }

  const bool track = needs_grad({&params, &inputs});
  Shape shape = inputs.rank() == 2 ? Shape{n, nq} : Shape{nq};
  Tensor result = make_result(std::move(shape), std::move(out), track);
  if (track) {
    auto sp = params.storage(), sx = inputs.storage(), so = result.storage();
    Tape::active()->record(so, [spec, sp, sx, so, n, width, nq, p, shared] {
      for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> row_params(sp->data.data() + (shared ? 0 : i * p), p);
        const std::span<const double> row_x(sx->data.data() + i * width, width);
        const std::span<const double> upstream(so->grad.data() + i * nq, nq);
        const auto g = vqc_vjp(spec, row_params, row_x, upstream);
        if (sp->requires_grad) {
          auto& gp = sp->grad_buffer();
          for (std::size_t j = 0; j < g.params.size(); ++j) gp[(shared ? 0 : i * p) + j] += g.params[j];
        }
        if (sx->requires_grad) {
          auto& gx = sx->grad_buffer();
          for (std::size_t j = 0; j < width; ++j) gx[i * width + j] += g.input[j];
        }
      }
    });
  }
  return result;
}

}  // namespace qtb::qsim
