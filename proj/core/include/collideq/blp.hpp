#pragma once

// Discretized BLP non-Markovianity over collision-model dynamics.

#include <cstddef>
#include <optional>
#include <vector>

#include "collideq/collision.hpp"

namespace collideq {

// Increments of the trace distance at or below this size are round-off.
inline constexpr double kRevivalTolerance = 1e-12;

struct BlochGrid {
  std::size_t n_theta = 32;
  std::size_t n_phi = 16;
};

struct BlpResult {
  double value = 0.0;
  double theta = 0.0;  // Bloch angles of the optimal pair's first state
  double phi = 0.0;
  std::vector<double> series;  // D_n for the optimal pair, n = 0..n_steps
  bool converged = false;      // every pair's final distance below 1e-6
};

// Σ_n max(0, D_n − D_{n−1}), ignoring increments ≤ kRevivalTolerance.
double accumulate_revivals(const std::vector<double>& series);

// ceil(20 / (Γ·Δt)), capped at 10⁶.
std::size_t default_blp_horizon(const ModelConfig& cfg);

// Evolves the antipodal pure pair at (θ, φ) through the embedded dynamics
// with identical fresh memories and returns D_n for n = 0..n_steps.
std::vector<double> pair_trace_distances(const ModelConfig& cfg, double theta, double phi,
                                         std::size_t n_steps);

// Maximizes over a θ×φ grid with θ ∈ [0, π] (endpoints included) and
// φ ∈ [0, π). Grids smaller than 8×8 are rejected.
BlpResult blp_measure(const ModelConfig& cfg, std::optional<std::size_t> n_steps = std::nullopt,
                      BlochGrid grid = {});

}  // namespace collideq
