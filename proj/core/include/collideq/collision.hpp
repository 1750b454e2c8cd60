#pragma once

// Collision-model dynamics for a qubit coupled to one thermal bath (setting I)
// or to a ground-state bath and an excited-state bath at once (setting II),
// optionally with partial-swap collisions between consecutive bath units.
//
// Non-Markovian dynamics are handled through a memory embedding: every bath
// keeps one "memory" qubit M that has already collided with the system. A step
// is
//   1. collide S with the memories (partial swap or two-bath exponential),
//   2. collide each memory with a fresh unit F through the intra-bath swap,
//   3. swap M and F, so the fresh unit becomes the next memory,
//   4. trace the old memory out.
// At δ = 0 this reduces exactly to the Markovian collision model.

#include <cstddef>
#include <string>
#include <vector>

#include "collideq/metrics.hpp"
#include "collideq/tensor.hpp"

namespace collideq {

enum class Setting { I, II };

std::string to_string(Setting s);

struct Couplings {
  double j = 0.0;   // setting I
  double j0 = 0.0;  // setting II, ground-state bath
  double j1 = 0.0;  // setting II, excited-state bath
};

struct ModelConfig {
  double omega = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
  double dt = 0.01;
  double delta = 0.0;  // radians, [0, π/2)
  Setting setting = Setting::I;

  // Throws InvalidParameter on out-of-range fields.
  void validate() const;
  std::size_t bath_count() const noexcept { return setting == Setting::I ? 1 : 2; }
  Couplings couplings() const;
};

struct HeatRecord {
  int bath = 0;
  double q_sa = 0.0;
  double q_intra_in = 0.0;
  double q_intra_out = 0.0;
  double q_lifecycle = 0.0;
};

HermitianOp heisenberg_interaction(double j, const std::string& a, const std::string& b,
                                   const QubitRegister& reg);
UnitaryOp partial_swap(double theta, const std::string& a, const std::string& b,
                       const QubitRegister& reg);
// Requires 0 ≤ δ < π/2.
UnitaryOp intra_bath_unitary(double delta, const std::string& a, const std::string& b,
                             const QubitRegister& reg);
UnitaryOp setting2_unitary(const ModelConfig& cfg, const QubitRegister& reg,
                           const std::string& s = "S", const std::string& a0 = "A0",
                           const std::string& a1 = "A1");

// System–bath unitary on (S, A) or (S, A0, A1).
UnitaryOp collision_unitary(const ModelConfig& cfg);

// Initial level populations of a fresh unit of bath `bath`.
struct LevelWeight {
  Level level;
  double weight;
};
std::vector<LevelWeight> fresh_unit_distribution(const ModelConfig& cfg, std::size_t bath);
DensityMatrix fresh_unit_state(const ModelConfig& cfg, std::size_t bath,
                               const std::string& label);

struct MarkovianStep {
  DensityMatrix state;
  std::vector<HeatRecord> heat;
};

// One memoryless collision; requires cfg.delta == 0.
MarkovianStep markovian_step(const ModelConfig& cfg, const DensityMatrix& rho_s);

// A CPTP map in row-major vectorized form: vec(X)[i·d + j] = X(i, j).
class StepChannel {
 public:
  StepChannel(QubitRegister reg, ComplexMatrix superop, std::string description);

  const QubitRegister& reg() const noexcept { return reg_; }
  const ComplexMatrix& superoperator() const noexcept { return superop_; }
  const std::string& description() const noexcept { return description_; }

  ComplexMatrix apply(const ComplexMatrix& x) const;
  DensityMatrix apply(const DensityMatrix& rho) const;
  // Choi matrix Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
  ComplexMatrix choi() const;

  static StepChannel from_kraus(QubitRegister reg, const std::vector<ComplexMatrix>& kraus,
                                std::string description);

 private:
  QubitRegister reg_;
  ComplexMatrix superop_;
  std::string description_;
};

// Kraus branch of one embedded step, labelled by the energy-basis outcomes of
// the incoming units (`first`) and of the outgoing memories (`second`).
struct KrausBranch {
  std::vector<Level> first;
  std::vector<Level> second;
  double first_weight = 1.0;  // probability of `first` in the fresh state
  ComplexMatrix op;           // ⟨second| V |first⟩ on the compound
};

class CollisionModel {
 public:
  explicit CollisionModel(ModelConfig cfg);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::size_t bath_count() const noexcept { return cfg_.bath_count(); }
  // (S, M) or (S, M0, M1).
  const QubitRegister& compound_register() const noexcept { return compound_; }
  // Compound plus the incoming units (F) or (F0, F1).
  const QubitRegister& extended_register() const noexcept { return extended_; }
  const std::string& memory_label(std::size_t bath) const { return memory_labels_.at(bath); }

  // ρ_S ⊗ fresh memories.
  DensityMatrix initial_compound(const DensityMatrix& rho_s) const;

  // System–memory unitary on the compound.
  const ComplexMatrix& system_collision() const noexcept { return system_collision_; }
  // Intra-bath collision followed by the M↔F swap, on the extended register.
  const ComplexMatrix& intra_and_swap() const noexcept { return intra_and_swap_; }
  const ComplexMatrix& fresh_state() const noexcept { return fresh_; }

  struct Step {
    DensityMatrix compound;
    std::vector<HeatRecord> heat;
    // Heat into each new memory from its collision with the outgoing one.
    std::vector<double> incoming_heat;
  };

  // One embedded step. `pending_in` is the incoming_heat of the previous step
  // (zeros for memories that start fresh).
  Step step(const DensityMatrix& compound, const std::vector<double>& pending_in) const;

  StepChannel channel() const;
  const std::vector<KrausBranch>& kraus() const noexcept { return kraus_; }

  // ⟨(ω/2)σ_z⟩ of qubit `label` in an operator on `reg`.
  double energy(const ComplexMatrix& m, const QubitRegister& reg, const std::string& label) const;

 private:
  ModelConfig cfg_;
  QubitRegister compound_;
  QubitRegister extended_;
  std::vector<std::string> memory_labels_;
  std::vector<std::string> fresh_labels_;
  ComplexMatrix system_collision_;
  ComplexMatrix intra_and_swap_;
  ComplexMatrix fresh_;
  std::vector<double> fresh_energy_;
  std::vector<KrausBranch> kraus_;
};

// Memoryless one-step channel on S alone; requires cfg.delta == 0.
StepChannel markovian_step_channel(const ModelConfig& cfg);
StepChannel embedded_step_channel(const ModelConfig& cfg);

// Fixed point from the eigenvector of the superoperator at eigenvalue one.
// Throws NonUniqueSteadyState when more than one eigenvalue lies within 1e-9
// of the unit circle.
DensityMatrix steady_state(const StepChannel& channel);
// Independent route: repeated squaring of the superoperator applied to the
// maximally mixed state.
DensityMatrix steady_state_power(const StepChannel& channel);

struct EvolutionSample {
  std::size_t step = 0;
  double t = 0.0;
  DensityMatrix rho_s;
  std::vector<HeatRecord> heat;  // empty for the initial sample
  double fidelity_to_gibbs = 0.0;
  EffectiveTemperature beta_e;
};

// Samples for n = 0..n_steps. Memories start in fresh bath states.
std::vector<EvolutionSample> evolve(const ModelConfig& cfg, const DensityMatrix& rho0_s,
                                    std::size_t n_steps);

struct HeatFlux {
  std::vector<double> per_bath;  // q_sa / Δt at the steady state
};

HeatFlux steady_heat_flux(const ModelConfig& cfg);
// Same, for a steady state already at hand.
HeatFlux steady_heat_flux(const CollisionModel& model, const DensityMatrix& steady);

}  // namespace collideq
