#include "collideq/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "collideq/errors.hpp"

namespace collideq {

namespace {

constexpr double kSqrtClamp = 1e-12;
// Eigenvalues of √σρ√σ at round-off level; their roots would add ~1e-8.
constexpr double kFidelityNoise = 1e-15;
constexpr double kDiagonalTolerance = 1e-8;
constexpr double kSaturation = 1e-12;
// Negative partial-transpose eigenvalues smaller than this are eigensolver
// round-off on separable states; the tripartite cube root would amplify them.
constexpr double kNegativityFloor = 1e-13;

void require_same_register(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("states live on different dimensions");
}

DensityMatrix diagonal_qubit(double p_excited, const std::string& label) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = p_excited;
  m(1, 1) = 1.0 - p_excited;
  return DensityMatrix::trusted(QubitRegister{label}, std::move(m));
}

}  // namespace

double nbar(double beta, double omega) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be positive");
  if (std::isinf(beta) && beta > 0) return 0.0;
  if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
  return 1.0 / std::expm1(beta * omega);
}

ThermalParams thermal_params(double beta, double omega) {
  const double n = nbar(beta, omega);
  return ThermalParams{beta, omega, n, 1.0 / (2.0 * n + 1.0)};
}

ComplexMatrix qubit_hamiltonian(double omega) { return 0.5 * omega * pauli::z(); }

DensityMatrix gibbs_qubit(double beta, double omega, const std::string& label) {
  const auto tp = thermal_params(beta, omega);
  return diagonal_qubit(0.5 * (1.0 - tp.g), label);
}

DensityMatrix level_state(Level level, const std::string& label) {
  return diagonal_qubit(level == Level::excited ? 1.0 : 0.0, label);
}

DensityMatrix ground_state(const std::string& label) { return level_state(Level::ground, label); }
DensityMatrix excited_state(const std::string& label) { return level_state(Level::excited, label); }

DensityMatrix maximally_mixed(const QubitRegister& reg) {
  const auto d = static_cast<Eigen::Index>(reg.dim());
  return DensityMatrix::trusted(reg, ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix bloch_state(double theta, double phi, const std::string& label) {
  Eigen::Vector2cd psi;
  psi(0) = std::cos(0.5 * theta);
  psi(1) = std::polar(std::sin(0.5 * theta), phi);
  return DensityMatrix::trusted(QubitRegister{label}, psi * psi.adjoint());
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  const auto es = eig_hermitian(m, kStructuralTolerance);
  const auto n = static_cast<Eigen::Index>(es.values.size());
  Eigen::VectorXd roots(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = es.values[static_cast<std::size_t>(k)];
    roots(k) = v < kSqrtClamp ? 0.0 : std::sqrt(v);
  }
  return es.vectors * roots.asDiagonal() * es.vectors.adjoint();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_register(rho, sigma);
  const ComplexMatrix s = psd_sqrt(sigma.matrix());
  const ComplexMatrix inner = s * rho.matrix() * s;
  const auto es = eig_hermitian(0.5 * (inner + inner.adjoint()), kStructuralTolerance);
  double tr = 0.0;
  for (double v : es.values) tr += v < kFidelityNoise ? 0.0 : std::sqrt(v);
  return std::clamp(tr * tr, 0.0, 1.0);
}

double half_trace_norm(const ComplexMatrix& m) {
  const auto es = eig_hermitian(m, kStructuralTolerance);
  double s = 0.0;
  for (double v : es.values) s += std::abs(v);
  return 0.5 * s;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_register(rho, sigma);
  return half_trace_norm(rho.matrix() - sigma.matrix());
}

EffectiveTemperature effective_temperature(const DensityMatrix& rho, double omega) {
  if (rho.dim() != 2) throw DimensionMismatch("effective temperature needs a single qubit");
  if (!(omega > 0.0)) throw InvalidParameter("omega must be positive");
  if (std::abs(rho.matrix()(0, 1)) > kDiagonalTolerance) {
    throw NotDiagonal("state has coherences in the energy basis");
  }
  EffectiveTemperature out;
  out.g_e = rho.matrix()(1, 1).real() - rho.matrix()(0, 0).real();
  if (std::abs(out.g_e) >= 1.0 - kSaturation) {
    out.valid = false;
    out.beta_e = std::copysign(std::numeric_limits<double>::infinity(), out.g_e);
    return out;
  }
  out.valid = true;
  out.beta_e = std::log((1.0 + out.g_e) / (1.0 - out.g_e)) / omega;
  return out;
}

double fidelity_from_delta_beta(double beta, double delta_beta, double omega) {
  const double num = 1.0 + std::exp(0.5 * omega * (delta_beta + 2.0 * beta));
  const double den = (1.0 + std::exp(omega * beta)) * (1.0 + std::exp(omega * (delta_beta + beta)));
  return num * num / den;
}

double negativity(const DensityMatrix& rho, std::span<const std::string> part) {
  const ComplexMatrix pt = partial_transpose(rho, part);
  const auto es = eig_hermitian(pt, kStructuralTolerance);
  double neg = 0.0;
  for (double v : es.values) {
    if (v < -kNegativityFloor) neg -= v;
  }
  return 2.0 * neg;
}

double negativity_2(const DensityMatrix& rho) {
  if (rho.reg().size() != 2) throw DimensionMismatch("negativity_2 needs a two-qubit state");
  const std::string first = rho.reg().labels().front();
  return negativity(rho, std::span<const std::string>(&first, 1));
}

double negativity_bipartition(const DensityMatrix& rho, const std::string& part) {
  if (rho.reg().size() != 3) {
    throw DimensionMismatch("bipartition negativity needs a three-qubit state");
  }
  return negativity(rho, std::span<const std::string>(&part, 1));
}

double tripartite_negativity(const DensityMatrix& rho) {
  if (rho.reg().size() != 3) {
    throw DimensionMismatch("tripartite negativity needs a three-qubit state");
  }
  double product = 1.0;
  for (const auto& l : rho.reg().labels()) product *= negativity_bipartition(rho, l);
  return product > 0.0 ? std::cbrt(product) : 0.0;
}

}  // namespace collideq
