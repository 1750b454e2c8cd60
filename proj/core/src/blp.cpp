#include "collideq/blp.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "collideq/errors.hpp"

namespace collideq {

namespace {

constexpr double kConvergedDistance = 1e-6;
constexpr std::size_t kMaxHorizon = 1'000'000;

ComplexMatrix vectorize(const ComplexMatrix& x) {
  const auto d = x.rows();
  ComplexMatrix v(d * d, 1);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j, 0) = x(i, j);
  return v;
}

// Bloch vector (½Tr σ_i X) of the system marginal of a vectorized compound
// operator.
Eigen::Vector3d system_bloch(const ComplexMatrix& vec, Eigen::Index d) {
  // With S the most significant qubit, block (a, b) of size d/2 holds S = (a, b).
  const Eigen::Index half = d / 2;
  Complex s00{0.0, 0.0}, s01{0.0, 0.0}, s11{0.0, 0.0};
  for (Eigen::Index m = 0; m < half; ++m) {
    s00 += vec(m * d + m, 0);
    s01 += vec(m * d + (half + m), 0);
    s11 += vec((half + m) * d + (half + m), 0);
  }
  return Eigen::Vector3d(s01.real(), -s01.imag(), 0.5 * (s00 - s11).real());
}

Eigen::Vector3d bloch_direction(double theta, double phi) {
  return Eigen::Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                         std::cos(theta));
}

}  // namespace

double accumulate_revivals(const std::vector<double>& series) {
  double total = 0.0;
  for (std::size_t n = 1; n < series.size(); ++n) {
    const double inc = series[n] - series[n - 1];
    if (inc > kRevivalTolerance) total += inc;
  }
  return total;
}

std::size_t default_blp_horizon(const ModelConfig& cfg) {
  cfg.validate();
  const double n = std::ceil(20.0 / (cfg.gamma * cfg.dt));
  return n >= static_cast<double>(kMaxHorizon) ? kMaxHorizon : static_cast<std::size_t>(n);
}

std::vector<double> pair_trace_distances(const ModelConfig& cfg, double theta, double phi,
                                         std::size_t n_steps) {
  const CollisionModel model(cfg);
  const StepChannel ch = model.channel();
  DensityMatrix rho = model.initial_compound(bloch_state(theta, phi));
  DensityMatrix pi = model.initial_compound(bloch_state(std::numbers::pi - theta, phi + std::numbers::pi));
  const std::vector<std::string> sys{"S"};

  std::vector<double> out;
  out.reserve(n_steps + 1);
  for (std::size_t n = 0;; ++n) {
    out.push_back(trace_distance(partial_trace(rho, sys), partial_trace(pi, sys)));
    if (n == n_steps) break;
    rho = ch.apply(rho);
    pi = ch.apply(pi);
  }
  return out;
}

BlpResult blp_measure(const ModelConfig& cfg, std::optional<std::size_t> n_steps, BlochGrid grid) {
  if (grid.n_theta < 8 || grid.n_phi < 8) throw InvalidParameter("BLP grid must be at least 8x8");
  const std::size_t steps = n_steps.value_or(default_blp_horizon(cfg));
  if (steps == 0) throw InvalidParameter("BLP needs at least one step");

  const CollisionModel model(cfg);
  const StepChannel ch = model.channel();
  const auto d = static_cast<Eigen::Index>(model.compound_register().dim());

  // The state difference of an antipodal pair is r·σ ⊗ (memories), so the
  // evolved system difference is linear in r: D_n = |R_n r|.
  ComplexMatrix memories = ComplexMatrix::Ones(1, 1);
  for (std::size_t b = 0; b < model.bath_count(); ++b) {
    memories = kron(memories, fresh_unit_state(cfg, b, model.memory_label(b)).matrix());
  }
  const std::array<ComplexMatrix, 3> paulis{pauli::x(), pauli::y(), pauli::z()};
  std::array<ComplexMatrix, 3> vecs;
  for (std::size_t k = 0; k < 3; ++k) vecs[k] = vectorize(kron(paulis[k], memories));

  std::vector<Eigen::Matrix3d> response(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    for (std::size_t k = 0; k < 3; ++k) {
      response[n].col(static_cast<Eigen::Index>(k)) = system_bloch(vecs[k], d);
      if (n < steps) vecs[k] = ch.superoperator() * vecs[k];
    }
  }

  BlpResult best;
  best.value = -1.0;
  bool all_converged = true;
  std::vector<double> series(steps + 1);
  for (std::size_t i = 0; i < grid.n_theta; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid.n_theta - 1);
    for (std::size_t j = 0; j < grid.n_phi; ++j) {
      const double phi = std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid.n_phi);
      const Eigen::Vector3d r = bloch_direction(theta, phi);
      for (std::size_t n = 0; n <= steps; ++n) series[n] = (response[n] * r).norm();
      if (series.back() >= kConvergedDistance) all_converged = false;
      const double value = accumulate_revivals(series);
      if (value > best.value) {
        best.value = value;
        best.theta = theta;
        best.phi = phi;
        best.series = series;
      }
    }
  }
  best.converged = all_converged;
  return best;
}

}  // namespace collideq
