#pragma once

// Reference GKSL integrator for the thermal qubit master equation. Used only
// to validate the collision engines in the short-collision limit.

#include <cstddef>
#include <vector>

#include "collideq/tensor.hpp"

namespace collideq {

struct JumpOperator {
  ComplexMatrix op;
  double rate = 0.0;
};

struct LindbladSpec {
  HermitianOp h_sys;
  std::vector<JumpOperator> jumps;
};

// σ⁻ with rate Γ(N̄+1) and σ⁺ with rate ΓN̄, H = (ω/2)σ_z.
LindbladSpec thermal_lindblad(double omega, double gamma, double beta);

// σ⁻ = |g⟩⟨e| in the (excited, ground) ordering.
ComplexMatrix sigma_minus();
ComplexMatrix sigma_plus();

// LρL† − ½{L†L, ρ}.
ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho);

struct IntegrateOptions {
  // The free term −i[H, ρ] is dropped by default (interaction picture).
  bool include_hamiltonian = false;
};

struct LindbladSeries {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::size_t renormalizations = 0;
};

// Classical RK4 on the vectorized generator with fixed step `h_step`.
// Throws IntegrationUnstable when the trace drifts by more than 1e-6 or the
// state blows up.
LindbladSeries integrate(const LindbladSpec& spec, const DensityMatrix& rho0, double t_final,
                         double h_step, IntegrateOptions opts = {});

}  // namespace collideq
