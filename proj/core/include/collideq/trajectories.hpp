#pragma once

// Two-point-measurement trajectories on the bath units.
//
// Each bath unit is measured in the energy basis when it is created and again
// after its last collision (the one with its successor). The outcome
// difference defines the stochastic heat ω(z₂ − z₁)/2 it absorbed.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "collideq/collision.hpp"

namespace collideq {

struct TpmOutcome {
  Level first = Level::ground;
  Level second = Level::ground;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::size_t n_baths = 0;
  // outcomes[n · n_baths + b] for step n + 1.
  std::vector<TpmOutcome> outcomes;
  std::vector<double> heats;
  DensityMatrix final_system_state = maximally_mixed(QubitRegister{"S"});

  const TpmOutcome& outcome(std::size_t step, std::size_t bath) const {
    return outcomes[(step - 1) * n_baths + bath];
  }
  double heat(std::size_t step, std::size_t bath) const { return heats[(step - 1) * n_baths + bath]; }
};

struct EnsembleStats {
  std::size_t n_trajectories = 0;
  std::size_t n_baths = 0;
  // [n · n_baths + b] for step n + 1.
  std::vector<double> mean_heat;
  std::vector<double> std_error;
  // Average of the final conditional system states.
  ComplexMatrix mean_final_state;

  double mean(std::size_t step, std::size_t bath) const { return mean_heat[(step - 1) * n_baths + bath]; }
  double se(std::size_t step, std::size_t bath) const { return std_error[(step - 1) * n_baths + bath]; }
};

// Heat absorbed by a unit with TPM outcomes (first, second).
double stochastic_heat(double omega, Level first, Level second);

// Counter-based uniform deviate in [0, 1) for (seed, step, stream).
double counter_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t stream);
// Seed of trajectory `index` under `master_seed`.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

TrajectoryRecord run_trajectory(const ModelConfig& cfg, const DensityMatrix& rho0_s,
                                std::size_t n_steps, std::uint64_t seed);

// Trajectories run on up to `threads` workers (0 = COLLIDEQ_THREADS or the
// hardware count). Results do not depend on the thread count.
EnsembleStats ensemble_mean_heat(const ModelConfig& cfg, const DensityMatrix& rho0_s,
                                 std::size_t n_steps, std::size_t n_trajectories,
                                 std::uint64_t master_seed, std::size_t threads = 0);

// Worker count from COLLIDEQ_THREADS, else the hardware concurrency.
std::size_t default_thread_count();

}  // namespace collideq
