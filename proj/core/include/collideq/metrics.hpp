#pragma once

// Qubit thermal states and scalar diagnostics.
//
// Basis ordering for every qubit: index 0 is the excited state, index 1 the
// ground state, so σ_z = diag(1, −1) and H = (ω/2)σ_z. A Gibbs state is then
// diag((1−g)/2, (1+g)/2).

#include <limits>
#include <span>
#include <string>

#include "collideq/tensor.hpp"

namespace collideq {

// β = +∞ marks the zero-temperature limit.
inline constexpr double kZeroTemperature = std::numeric_limits<double>::infinity();

enum class Level { excited = 0, ground = 1 };

// +1 for excited, −1 for ground.
constexpr int z_value(Level l) noexcept { return l == Level::excited ? 1 : -1; }
constexpr Eigen::Index basis_index(Level l) noexcept { return static_cast<Eigen::Index>(l); }

struct ThermalParams {
  double beta;
  double omega;
  double nbar;
  double g;
};

double nbar(double beta, double omega);
ThermalParams thermal_params(double beta, double omega);

// (ω/2)σ_z.
ComplexMatrix qubit_hamiltonian(double omega);

DensityMatrix gibbs_qubit(double beta, double omega, const std::string& label = "S");
DensityMatrix level_state(Level level, const std::string& label = "S");
DensityMatrix ground_state(const std::string& label = "S");
DensityMatrix excited_state(const std::string& label = "S");
DensityMatrix maximally_mixed(const QubitRegister& reg);

// Pure state cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩.
DensityMatrix bloch_state(double theta, double phi, const std::string& label = "S");

// √ of a PSD matrix; eigenvalues below 1e-12 are clamped to zero.
ComplexMatrix psd_sqrt(const ComplexMatrix& m);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
// ½‖m‖₁ for a Hermitian matrix.
double half_trace_norm(const ComplexMatrix& m);

struct EffectiveTemperature {
  double g_e = 0.0;
  double beta_e = 0.0;  // ±∞ when |g_e| reaches 1
  bool valid = false;
};

EffectiveTemperature effective_temperature(const DensityMatrix& rho, double omega);
double fidelity_from_delta_beta(double beta, double delta_beta, double omega);

// 2·Σ max(0, −λ) over the spectrum of the partial transpose on `part`;
// eigenvalues within 1e-13 of zero count as zero.
double negativity(const DensityMatrix& rho, std::span<const std::string> part);
double negativity_2(const DensityMatrix& rho);
double negativity_bipartition(const DensityMatrix& rho, const std::string& part);
double tripartite_negativity(const DensityMatrix& rho);

}  // namespace collideq
