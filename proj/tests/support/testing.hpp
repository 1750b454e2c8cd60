#pragma once

// Shared helpers for the test suites: seeded random states and a brute-force
// chain simulation of the collision model that does not use the memory
// embedding.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "collideq/collision.hpp"
#include "collideq/metrics.hpp"
#include "collideq/tensor.hpp"

namespace collideq::testing {

inline ComplexMatrix ginibre(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(n(rng), n(rng));
  return g;
}

inline QubitRegister make_register(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("q" + std::to_string(i));
  return QubitRegister(labels);
}

inline DensityMatrix random_state(const QubitRegister& reg, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(static_cast<Eigen::Index>(reg.dim()), rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(reg, 0.5 * (rho + rho.adjoint()));
}

inline ComplexMatrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(d, rng);
  return 0.5 * (g + g.adjoint());
}

// Entry (i, j) of a ⊗ b computed from the index arithmetic directly.
inline ComplexMatrix kron_loops(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

// ---------------------------------------------------------------------------
// Chain oracle: every bath unit is an explicit qubit that is added when it
// arrives and traced out after its collision with its successor.

struct ChainStep {
  ComplexMatrix rho_s;
  std::vector<double> lifecycle_heat;  // per bath, for the unit leaving at this step
};

inline ComplexMatrix swap4() {
  ComplexMatrix w = ComplexMatrix::Zero(4, 4);
  w(0, 0) = w(3, 3) = 1.0;
  w(1, 2) = w(2, 1) = 1.0;
  return w;
}

inline ComplexMatrix exchange4() {
  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  return kron_loops(x, x) + kron_loops(y, y) + kron_loops(z, z);
}

inline ComplexMatrix fresh_unit(const ModelConfig& cfg, std::size_t bath) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  if (cfg.setting == Setting::II) {
    m(bath == 0 ? 1 : 0, bath == 0 ? 1 : 0) = 1.0;
    return m;
  }
  const double g = std::isinf(cfg.beta) ? 1.0 : std::tanh(0.5 * cfg.beta * cfg.omega);
  m(0, 0) = 0.5 * (1.0 - g);
  m(1, 1) = 0.5 * (1.0 + g);
  return m;
}

inline std::vector<ChainStep> chain_evolve(const ModelConfig& cfg, const ComplexMatrix& rho0_s,
                                           std::size_t n_steps) {
  const std::size_t nb = cfg.setting == Setting::I ? 1 : 2;
  const double nbar = std::isinf(cfg.beta) ? 0.0 : 1.0 / std::expm1(cfg.beta * cfg.omega);
  auto unit = [](std::size_t b, std::size_t n) { return "A" + std::to_string(b) + "_" + std::to_string(n); };

  ComplexMatrix u_int;
  if (cfg.setting == Setting::I) {
    const double theta = std::sqrt(cfg.gamma * (2 * nbar + 1) / cfg.dt) * cfg.dt;
    u_int = std::cos(theta) * ComplexMatrix::Identity(4, 4) - Complex(0, std::sin(theta)) * swap4();
  } else {
    const double j0 = std::sqrt(cfg.gamma * (nbar + 1) / cfg.dt);
    const double j1 = std::sqrt(cfg.gamma * nbar / cfg.dt);
    const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
    // Factor order (S, A0, A1).
    ComplexMatrix h0 = kron_loops(exchange4(), id2);
    // S–A1 exchange: conjugate the S–A0 term by SWAP(A0, A1).
    const ComplexMatrix p = kron_loops(id2, swap4());
    const ComplexMatrix h1 = p * h0 * p;
    const ComplexMatrix h = -0.5 * j0 * h0 - 0.5 * j1 * h1;
    u_int = (Complex(0, -cfg.dt) * h).exp();
  }
  const ComplexMatrix u_aa = std::cos(cfg.delta) * ComplexMatrix::Identity(4, 4) -
                             Complex(0, std::sin(cfg.delta)) * swap4();
  ComplexMatrix sz(2, 2);
  sz << 0.5 * cfg.omega, 0, 0, -0.5 * cfg.omega;

  std::vector<std::string> labels{"S"};
  ComplexMatrix rho = rho0_s;
  for (std::size_t b = 0; b < nb; ++b) {
    labels.push_back(unit(b, 1));
    rho = kron_loops(rho, fresh_unit(cfg, b));
  }
  // Every unit starts in its bath's fresh state.
  std::vector<double> birth_energy(nb);
  for (std::size_t b = 0; b < nb; ++b) birth_energy[b] = (sz * fresh_unit(cfg, b)).trace().real();

  std::vector<ChainStep> out;
  out.push_back({rho0_s, {}});
  for (std::size_t n = 1; n <= n_steps; ++n) {
    QubitRegister reg(labels);
    std::vector<std::string> on{"S"};
    for (std::size_t b = 0; b < nb; ++b) on.push_back(unit(b, n));
    const ComplexMatrix us = embed(u_int, on, reg);
    rho = us * rho * us.adjoint();

    ChainStep st;
    for (std::size_t b = 0; b < nb; ++b) {
      labels.push_back(unit(b, n + 1));
      rho = kron_loops(rho, fresh_unit(cfg, b));
      reg = QubitRegister(labels);
      const ComplexMatrix ua = embed(u_aa, {unit(b, n), unit(b, n + 1)}, reg);
      rho = ua * rho * ua.adjoint();
      const ComplexMatrix unit_state = partial_trace(rho, reg, std::vector<std::string>{unit(b, n)});
      st.lifecycle_heat.push_back((sz * unit_state).trace().real() - birth_energy[b]);
      std::vector<std::string> keep;
      for (const auto& l : labels) {
        if (l != unit(b, n)) keep.push_back(l);
      }
      rho = partial_trace(rho, reg, keep);
      labels = keep;
    }
    st.rho_s = partial_trace(rho, QubitRegister(labels), std::vector<std::string>{"S"});
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace collideq::testing
