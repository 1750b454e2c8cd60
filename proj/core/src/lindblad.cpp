#include "collideq/lindblad.hpp"

#include <cmath>
#include <iostream>

#include "collideq/errors.hpp"
#include "collideq/metrics.hpp"

namespace collideq {

namespace {

constexpr double kRenormalizeThreshold = 1e-12;
constexpr double kUnstableDrift = 1e-6;

// Generator in row-major vectorization: vec(AXB) = (A ⊗ Bᵀ) vec(X).
ComplexMatrix liouvillian(const LindbladSpec& spec, bool include_hamiltonian) {
  const auto d = spec.h_sys.matrix().rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  ComplexMatrix gen = ComplexMatrix::Zero(d * d, d * d);
  if (include_hamiltonian) {
    const ComplexMatrix& h = spec.h_sys.matrix();
    gen += Complex(0.0, -1.0) * (kron(h, id) - kron(id, h.transpose()));
  }
  for (const auto& j : spec.jumps) {
    if (j.rate < 0.0) throw InvalidParameter("jump rates must be nonnegative");
    if (j.op.rows() != d || j.op.cols() != d) throw DimensionMismatch("jump operator dimension");
    const ComplexMatrix ldl = j.op.adjoint() * j.op;
    gen += j.rate * (kron(j.op, j.op.conjugate()) - 0.5 * kron(ldl, id) -
                     0.5 * kron(id, ldl.transpose()));
  }
  return gen;
}

}  // namespace

ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(basis_index(Level::ground), basis_index(Level::excited)) = 1.0;
  return m;
}

ComplexMatrix sigma_plus() { return sigma_minus().adjoint(); }

LindbladSpec thermal_lindblad(double omega, double gamma, double beta) {
  if (!(gamma >= 0.0)) throw InvalidParameter("gamma must be nonnegative");
  const double n = nbar(beta, omega);
  return LindbladSpec{HermitianOp(QubitRegister{"S"}, qubit_hamiltonian(omega)),
                      {JumpOperator{sigma_minus(), gamma * (n + 1.0)},
                       JumpOperator{sigma_plus(), gamma * n}}};
}

ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho) {
  if (l.rows() != rho.rows() || l.cols() != rho.cols()) {
    throw DimensionMismatch("dissipator: operator and state dimensions differ");
  }
  const ComplexMatrix ldl = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

LindbladSeries integrate(const LindbladSpec& spec, const DensityMatrix& rho0, double t_final,
                         double h_step, IntegrateOptions opts) {
  if (!(h_step > 0.0)) throw InvalidParameter("h_step must be positive");
  if (!(t_final >= 0.0)) throw InvalidParameter("t_final must be nonnegative");
  const auto d = static_cast<Eigen::Index>(rho0.dim());
  if (spec.h_sys.matrix().rows() != d) throw DimensionMismatch("Hamiltonian and state dimensions");

  const ComplexMatrix gen = liouvillian(spec, opts.include_hamiltonian);
  Eigen::VectorXcd v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = rho0.matrix()(i, j);

  auto to_state = [&rho0, d](const Eigen::VectorXcd& x) {
    ComplexMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = x(i * d + j);
    return DensityMatrix::trusted(rho0.reg(), std::move(m));
  };
  auto trace_of = [d](const Eigen::VectorXcd& x) {
    Complex t{0.0, 0.0};
    for (Eigen::Index i = 0; i < d; ++i) t += x(i * d + i);
    return t;
  };

  const auto n_steps = static_cast<std::size_t>(std::llround(t_final / h_step));
  LindbladSeries out;
  out.times.reserve(n_steps + 1);
  out.states.reserve(n_steps + 1);
  out.times.push_back(0.0);
  out.states.push_back(DensityMatrix::trusted(rho0.reg(), rho0.matrix()));

  for (std::size_t n = 1; n <= n_steps; ++n) {
    const Eigen::VectorXcd k1 = gen * v;
    const Eigen::VectorXcd k2 = gen * (v + 0.5 * h_step * k1);
    const Eigen::VectorXcd k3 = gen * (v + 0.5 * h_step * k2);
    const Eigen::VectorXcd k4 = gen * (v + h_step * k3);
    v += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const Complex tr = trace_of(v);
    const double drift = std::abs(tr - Complex(1.0, 0.0));
    if (!std::isfinite(drift) || drift > kUnstableDrift || v.cwiseAbs().maxCoeff() > 1.0 + 1e-6) {
      throw IntegrationUnstable("RK4 step is unstable at h_step = " + std::to_string(h_step));
    }
    if (drift > kRenormalizeThreshold) {
      v /= tr;
      ++out.renormalizations;
      std::clog << "collideq: lindblad trace drift " << drift << " renormalized at step " << n
                << '\n';
    }
    out.times.push_back(static_cast<double>(n) * h_step);
    out.states.push_back(to_state(v));
  }
  return out;
}

}  // namespace collideq
