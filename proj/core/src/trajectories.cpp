#include "collideq/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "collideq/errors.hpp"

namespace collideq {

namespace {

constexpr double kBornTolerance = 1e-10;
constexpr std::size_t kBlockSize = 256;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Level level_of_bit(std::size_t bit) { return bit ? Level::ground : Level::excited; }

// Kraus branches of one step regrouped for sampling.
class TrajectoryEngine {
 public:
  explicit TrajectoryEngine(const ModelConfig& cfg) : model_(cfg) {
    nb_ = model_.bath_count();
    const std::size_t nout = std::size_t{1} << nb_;
    for (std::size_t b = 0; b < nb_; ++b) dists_.push_back(fresh_unit_distribution(cfg, b));
    ops_.assign(nout, std::vector<ComplexMatrix>(nout));
    effects_.assign(nout, std::vector<ComplexMatrix>(nout));
    for (const auto& br : model_.kraus()) {
      std::size_t k = 0, a = 0;
      for (std::size_t b = 0; b < nb_; ++b) {
        k = (k << 1) | static_cast<std::size_t>(basis_index(br.first[b]));
        a = (a << 1) | static_cast<std::size_t>(basis_index(br.second[b]));
      }
      ops_[k][a] = br.op;
      effects_[k][a] = br.op.adjoint() * br.op;
    }
  }

  std::size_t baths() const { return nb_; }
  double omega() const { return model_.config().omega; }
  const CollisionModel& model() const { return model_; }

  Level sample_fresh(std::size_t bath, double u) const {
    double acc = 0.0;
    const auto& dist = dists_[bath];
    for (const auto& lw : dist) {
      acc += lw.weight;
      if (u < acc) return lw.level;
    }
    return dist.back().level;
  }

  // Runs one trajectory; `sink(step, bath, outcome)` receives every TPM pair.
  template <class Sink>
  ComplexMatrix run(const DensityMatrix& rho0_s, std::size_t n_steps, std::uint64_t seed,
                    Sink&& sink) const {
    const std::size_t nout = std::size_t{1} << nb_;
    std::vector<Level> memory_first(nb_);
    ComplexMatrix rho = rho0_s.matrix();
    for (std::size_t b = 0; b < nb_; ++b) {
      memory_first[b] = sample_fresh(b, counter_uniform(seed, 0, 2 * b));
      ComplexMatrix unit = ComplexMatrix::Zero(2, 2);
      unit(basis_index(memory_first[b]), basis_index(memory_first[b])) = 1.0;
      rho = kron(rho, unit);
    }

    std::vector<double> probs(nout);
    for (std::size_t n = 1; n <= n_steps; ++n) {
      std::size_t k = 0;
      std::vector<Level> incoming(nb_);
      for (std::size_t b = 0; b < nb_; ++b) {
        incoming[b] = sample_fresh(b, counter_uniform(seed, n, 2 * b));
        k = (k << 1) | static_cast<std::size_t>(basis_index(incoming[b]));
      }

      for (std::size_t a = 0; a < nout; ++a) {
        const double p = (effects_[k][a].cwiseProduct(rho.transpose())).sum().real();
        if (p < -kBornTolerance || p > 1.0 + kBornTolerance || !std::isfinite(p)) {
          throw NumericalPositivityError("Born probability " + std::to_string(p) + " at step " +
                                         std::to_string(n));
        }
        probs[a] = std::max(p, 0.0);
      }

      // Measure the outgoing memories one bath at a time.
      std::size_t a = 0;
      for (std::size_t b = 0; b < nb_; ++b) {
        const std::size_t shift = nb_ - 1 - b;
        double p_excited = 0.0, p_total = 0.0;
        for (std::size_t idx = 0; idx < nout; ++idx) {
          if ((idx >> (shift + 1)) != (a >> (shift + 1))) continue;
          p_total += probs[idx];
          if (((idx >> shift) & 1u) == 0) p_excited += probs[idx];
        }
        const double u = counter_uniform(seed, n, 2 * b + 1);
        const std::size_t bit = (p_total > 0.0 && u * p_total < p_excited) ? 0 : 1;
        a |= bit << shift;
      }

      const ComplexMatrix& op = ops_[k][a];
      const double p = probs[a];
      if (!(p > 0.0)) throw NumericalPositivityError("sampled an outcome of zero probability");
      rho = (op * rho * op.adjoint()) / p;

      for (std::size_t b = 0; b < nb_; ++b) {
        const Level second = level_of_bit((a >> (nb_ - 1 - b)) & 1u);
        sink(n, b, TpmOutcome{memory_first[b], second});
        memory_first[b] = incoming[b];
      }
    }
    return partial_trace(rho, model_.compound_register(), std::vector<std::string>{"S"});
  }

 private:
  CollisionModel model_;
  std::size_t nb_ = 1;
  std::vector<std::vector<LevelWeight>> dists_;
  // Indexed [first outcome][second outcome].
  std::vector<std::vector<ComplexMatrix>> ops_;
  std::vector<std::vector<ComplexMatrix>> effects_;
};

struct BlockSum {
  std::vector<std::int64_t> dz;   // Σ (z₂ − z₁)
  std::vector<std::int64_t> dz2;  // Σ (z₂ − z₁)²
  ComplexMatrix state;
};

}  // namespace

double stochastic_heat(double omega, Level first, Level second) {
  return 0.5 * omega * static_cast<double>(z_value(second) - z_value(first));
}

double counter_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t stream) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ (step * 0xD1B54A32D192ED03ULL));
  x = splitmix64(x ^ (stream * 0x8CB92BA72F3D8DD7ULL + 0x632BE59BD9B4E019ULL));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x5851F42D4C957F2DULL));
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("COLLIDEQ_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrajectoryRecord run_trajectory(const ModelConfig& cfg, const DensityMatrix& rho0_s,
                                std::size_t n_steps, std::uint64_t seed) {
  const TrajectoryEngine engine(cfg);
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.n_baths = engine.baths();
  rec.outcomes.reserve(n_steps * rec.n_baths);
  rec.heats.reserve(n_steps * rec.n_baths);
  const ComplexMatrix final_state =
      engine.run(rho0_s, n_steps, seed, [&](std::size_t, std::size_t, TpmOutcome o) {
        rec.outcomes.push_back(o);
        rec.heats.push_back(stochastic_heat(cfg.omega, o.first, o.second));
      });
  rec.final_system_state = DensityMatrix::trusted(QubitRegister{"S"}, final_state);
  return rec;
}

EnsembleStats ensemble_mean_heat(const ModelConfig& cfg, const DensityMatrix& rho0_s,
                                 std::size_t n_steps, std::size_t n_trajectories,
                                 std::uint64_t master_seed, std::size_t threads) {
  if (n_trajectories == 0) throw InvalidParameter("ensemble needs at least one trajectory");
  if (rho0_s.dim() != 2) throw DimensionMismatch("system state must be a single qubit");
  const TrajectoryEngine engine(cfg);
  const std::size_t nb = engine.baths();
  const std::size_t cells = n_steps * nb;
  const std::size_t n_blocks = (n_trajectories + kBlockSize - 1) / kBlockSize;

  std::vector<BlockSum> blocks(n_blocks);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t blk = next++; blk < n_blocks; blk = next++) {
      BlockSum sum{std::vector<std::int64_t>(cells, 0), std::vector<std::int64_t>(cells, 0),
                   ComplexMatrix::Zero(2, 2)};
      const std::size_t begin = blk * kBlockSize;
      const std::size_t end = std::min(n_trajectories, begin + kBlockSize);
      for (std::size_t t = begin; t < end; ++t) {
        sum.state += engine.run(rho0_s, n_steps, trajectory_seed(master_seed, t),
                                [&](std::size_t step, std::size_t bath, TpmOutcome o) {
                                  const int dz = z_value(o.second) - z_value(o.first);
                                  const std::size_t cell = (step - 1) * nb + bath;
                                  sum.dz[cell] += dz;
                                  sum.dz2[cell] += dz * dz;
                                });
      }
      blocks[blk] = std::move(sum);
    }
  };

  const std::size_t n_workers =
      std::min(n_blocks, threads == 0 ? default_thread_count() : threads);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  std::vector<std::int64_t> dz(cells, 0), dz2(cells, 0);
  ComplexMatrix state = ComplexMatrix::Zero(2, 2);
  for (const auto& blk : blocks) {
    for (std::size_t c = 0; c < cells; ++c) {
      dz[c] += blk.dz[c];
      dz2[c] += blk.dz2[c];
    }
    state += blk.state;
  }

  EnsembleStats stats;
  stats.n_trajectories = n_trajectories;
  stats.n_baths = nb;
  stats.mean_heat.resize(cells);
  stats.std_error.resize(cells);
  const double m = static_cast<double>(n_trajectories);
  const double unit = 0.5 * cfg.omega;
  for (std::size_t c = 0; c < cells; ++c) {
    const double s1 = static_cast<double>(dz[c]);
    const double s2 = static_cast<double>(dz2[c]);
    stats.mean_heat[c] = unit * s1 / m;
    double var = 0.0;
    if (n_trajectories > 1) var = std::max(0.0, (s2 - s1 * s1 / m) / (m - 1.0));
    stats.std_error[c] = unit * std::sqrt(var / m);
  }
  stats.mean_final_state = state / m;
  return stats;
}

}  // namespace collideq
