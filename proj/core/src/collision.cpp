#include "collideq/collision.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "collideq/errors.hpp"

namespace collideq {

namespace {

constexpr double kUnitCircleTolerance = 1e-9;

ComplexMatrix vectorize(const ComplexMatrix& x) {
  const auto d = x.rows();
  ComplexMatrix v(d * d, 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j, 0) = x(i, j);
  }
  return v;
}

ComplexMatrix unvectorize(const ComplexMatrix& v, Eigen::Index d) {
  ComplexMatrix x(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = v(i * d + j, 0);
  }
  return x;
}

DensityMatrix normalized_state(const QubitRegister& reg, ComplexMatrix x) {
  x = 0.5 * (x + x.adjoint()).eval();
  x /= x.trace().real();
  return DensityMatrix::trusted(reg, std::move(x));
}

std::vector<std::string> bath_labels(const char* stem, std::size_t n) {
  if (n == 1) return {stem};
  std::vector<std::string> out;
  for (std::size_t b = 0; b < n; ++b) out.push_back(stem + std::to_string(b));
  return out;
}

// Basis index of a product of levels over `n` qubits (first entry most significant).
std::size_t level_index(const std::vector<Level>& levels) {
  std::size_t idx = 0;
  for (Level l : levels) idx = (idx << 1) | static_cast<std::size_t>(basis_index(l));
  return idx;
}

// All assignments of levels to n qubits, in index order.
std::vector<std::vector<Level>> all_levels(std::size_t n) {
  std::vector<std::vector<Level>> out;
  for (std::size_t idx = 0; idx < (std::size_t{1} << n); ++idx) {
    std::vector<Level> ls(n);
    for (std::size_t b = 0; b < n; ++b) {
      ls[b] = ((idx >> (n - 1 - b)) & 1u) ? Level::ground : Level::excited;
    }
    out.push_back(std::move(ls));
  }
  return out;
}

}  // namespace

std::string to_string(Setting s) { return s == Setting::I ? "I" : "II"; }

void ModelConfig::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidParameter("omega must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
  if (!(delta >= 0.0) || !(delta < std::numbers::pi / 2)) {
    throw InvalidParameter("delta must lie in [0, pi/2)");
  }
}

Couplings ModelConfig::couplings() const {
  const double n = nbar(beta, omega);
  Couplings c;
  c.j = std::sqrt(gamma * (2.0 * n + 1.0) / dt);
  c.j0 = std::sqrt(gamma * (n + 1.0) / dt);
  c.j1 = std::sqrt(gamma * n / dt);
  return c;
}

HermitianOp heisenberg_interaction(double j, const std::string& a, const std::string& b,
                                   const QubitRegister& reg) {
  if (a == b) throw InvalidSubsystem("interaction needs two distinct subsystems");
  const ComplexMatrix exchange = kron(pauli::x(), pauli::x()) + kron(pauli::y(), pauli::y()) +
                                 kron(pauli::z(), pauli::z());
  ComplexMatrix h = embed(-0.5 * j * exchange, {a, b}, reg);
  return HermitianOp(reg, 0.5 * (h + h.adjoint()));
}

UnitaryOp partial_swap(double theta, const std::string& a, const std::string& b,
                       const QubitRegister& reg) {
  if (a == b) throw InvalidSubsystem("partial swap needs two distinct subsystems");
  const ComplexMatrix u = std::cos(theta) * ComplexMatrix::Identity(4, 4) -
                          Complex(0.0, std::sin(theta)) * pauli::swap();
  return UnitaryOp(reg, embed(u, {a, b}, reg));
}

UnitaryOp intra_bath_unitary(double delta, const std::string& a, const std::string& b,
                             const QubitRegister& reg) {
  if (!(delta >= 0.0) || !(delta < std::numbers::pi / 2)) {
    throw InvalidParameter("intra-bath angle must lie in [0, pi/2)");
  }
  return partial_swap(delta, a, b, reg);
}

UnitaryOp setting2_unitary(const ModelConfig& cfg, const QubitRegister& reg,
                           const std::string& s, const std::string& a0, const std::string& a1) {
  cfg.validate();
  const auto c = cfg.couplings();
  const ComplexMatrix h = heisenberg_interaction(c.j0, s, a0, reg).matrix() +
                          heisenberg_interaction(c.j1, s, a1, reg).matrix();
  return expm_i_hermitian(HermitianOp(reg, h), cfg.dt);
}

UnitaryOp collision_unitary(const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.setting == Setting::I) {
    const QubitRegister reg{"S", "A"};
    return partial_swap(cfg.couplings().j * cfg.dt, "S", "A", reg);
  }
  return setting2_unitary(cfg, QubitRegister{"S", "A0", "A1"});
}

std::vector<LevelWeight> fresh_unit_distribution(const ModelConfig& cfg, std::size_t bath) {
  if (bath >= cfg.bath_count()) throw InvalidParameter("bath index out of range");
  if (cfg.setting == Setting::II) {
    return {LevelWeight{bath == 0 ? Level::ground : Level::excited, 1.0}};
  }
  const double g = thermal_params(cfg.beta, cfg.omega).g;
  return {LevelWeight{Level::excited, 0.5 * (1.0 - g)}, LevelWeight{Level::ground, 0.5 * (1.0 + g)}};
}

DensityMatrix fresh_unit_state(const ModelConfig& cfg, std::size_t bath, const std::string& label) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  for (const auto& lw : fresh_unit_distribution(cfg, bath)) {
    m(basis_index(lw.level), basis_index(lw.level)) = lw.weight;
  }
  return DensityMatrix::trusted(QubitRegister{label}, std::move(m));
}

MarkovianStep markovian_step(const ModelConfig& cfg, const DensityMatrix& rho_s) {
  cfg.validate();
  if (cfg.delta != 0.0) throw InvalidParameter("markovian_step requires delta == 0");
  if (rho_s.dim() != 2) throw DimensionMismatch("markovian_step acts on a single qubit");

  const UnitaryOp u = collision_unitary(cfg);
  const QubitRegister& reg = u.reg();
  const std::size_t nb = cfg.bath_count();

  ComplexMatrix ext = rho_s.matrix();
  for (std::size_t b = 0; b < nb; ++b) {
    ext = kron(ext, fresh_unit_state(cfg, b, "A").matrix());
  }
  const ComplexMatrix after = u.matrix() * ext * u.matrix().adjoint();

  MarkovianStep out{DensityMatrix::trusted(QubitRegister{"S"},
                                           partial_trace(after, reg, std::vector<std::string>{"S"})),
                    {}};
  const ComplexMatrix h = qubit_hamiltonian(cfg.omega);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::vector<std::string> keep{reg.labels()[b + 1]};
    const ComplexMatrix before_a = partial_trace(ext, reg, keep);
    const ComplexMatrix after_a = partial_trace(after, reg, keep);
    HeatRecord rec;
    rec.bath = static_cast<int>(b);
    rec.q_sa = (h * (after_a - before_a)).trace().real();
    rec.q_lifecycle = rec.q_sa;
    out.heat.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// StepChannel

StepChannel::StepChannel(QubitRegister reg, ComplexMatrix superop, std::string description)
    : reg_(std::move(reg)), superop_(std::move(superop)), description_(std::move(description)) {
  const auto d2 = static_cast<Eigen::Index>(reg_.dim() * reg_.dim());
  if (superop_.rows() != d2 || superop_.cols() != d2) {
    throw DimensionMismatch("superoperator dimension does not match register");
  }
}

StepChannel StepChannel::from_kraus(QubitRegister reg, const std::vector<ComplexMatrix>& kraus,
                                    std::string description) {
  const auto d = static_cast<Eigen::Index>(reg.dim());
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& k : kraus) s += kron(k, k.conjugate());
  return StepChannel(std::move(reg), std::move(s), std::move(description));
}

ComplexMatrix StepChannel::apply(const ComplexMatrix& x) const {
  const auto d = static_cast<Eigen::Index>(reg_.dim());
  if (x.rows() != d || x.cols() != d) throw DimensionMismatch("channel input dimension");
  return unvectorize(superop_ * vectorize(x), d);
}

DensityMatrix StepChannel::apply(const DensityMatrix& rho) const {
  return DensityMatrix::trusted(reg_, apply(rho.matrix()));
}

ComplexMatrix StepChannel::choi() const {
  const auto d = static_cast<Eigen::Index>(reg_.dim());
  ComplexMatrix c(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index b = 0; b < d; ++b) c(i * d + a, j * d + b) = superop_(a * d + b, i * d + j);
  return c;
}

// ---------------------------------------------------------------------------
// CollisionModel

CollisionModel::CollisionModel(ModelConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t nb = cfg_.bath_count();
  memory_labels_ = bath_labels("M", nb);
  fresh_labels_ = bath_labels("F", nb);

  std::vector<std::string> compound{"S"};
  compound.insert(compound.end(), memory_labels_.begin(), memory_labels_.end());
  compound_ = QubitRegister(compound);
  extended_ = compound_ + QubitRegister(fresh_labels_);

  system_collision_ = collision_unitary(cfg_).matrix();

  const auto dext = static_cast<Eigen::Index>(extended_.dim());
  intra_and_swap_ = ComplexMatrix::Identity(dext, dext);
  for (std::size_t b = 0; b < nb; ++b) {
    const ComplexMatrix aa =
        intra_bath_unitary(cfg_.delta, memory_labels_[b], fresh_labels_[b], extended_).matrix();
    const ComplexMatrix sw = embed(pauli::swap(), {memory_labels_[b], fresh_labels_[b]}, extended_);
    intra_and_swap_ = (sw * aa * intra_and_swap_).eval();
  }

  fresh_ = ComplexMatrix::Ones(1, 1);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto unit = fresh_unit_state(cfg_, b, fresh_labels_[b]);
    fresh_ = kron(fresh_, unit.matrix());
    fresh_energy_.push_back((qubit_hamiltonian(cfg_.omega) * unit.matrix()).trace().real());
  }

  // Kraus branches ⟨second|_F V |first⟩_F of the full step V.
  const auto dc = static_cast<Eigen::Index>(compound_.dim());
  const auto df = static_cast<Eigen::Index>(std::size_t{1} << nb);
  const ComplexMatrix v =
      intra_and_swap_ * kron(system_collision_, ComplexMatrix::Identity(df, df));
  const auto levels = all_levels(nb);
  for (const auto& first : levels) {
    double w = 1.0;
    for (std::size_t b = 0; b < nb; ++b) {
      double p = 0.0;
      for (const auto& lw : fresh_unit_distribution(cfg_, b)) {
        if (lw.level == first[b]) p = lw.weight;
      }
      w *= p;
    }
    if (w <= 0.0) continue;
    const auto k = static_cast<Eigen::Index>(level_index(first));
    for (const auto& second : levels) {
      const auto a = static_cast<Eigen::Index>(level_index(second));
      ComplexMatrix op(dc, dc);
      for (Eigen::Index r = 0; r < dc; ++r)
        for (Eigen::Index c = 0; c < dc; ++c) op(r, c) = v(r * df + a, c * df + k);
      kraus_.push_back(KrausBranch{first, second, w, std::move(op)});
    }
  }
}

DensityMatrix CollisionModel::initial_compound(const DensityMatrix& rho_s) const {
  if (rho_s.dim() != 2) throw DimensionMismatch("system state must be a single qubit");
  ComplexMatrix m = rho_s.matrix();
  for (std::size_t b = 0; b < bath_count(); ++b) {
    m = kron(m, fresh_unit_state(cfg_, b, memory_labels_[b]).matrix());
  }
  return DensityMatrix::trusted(compound_, std::move(m));
}

double CollisionModel::energy(const ComplexMatrix& m, const QubitRegister& reg,
                              const std::string& label) const {
  const std::size_t bit = reg.bit(reg.position(label));
  double e = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const bool ground = (static_cast<std::size_t>(i) >> bit) & 1u;
    e += (ground ? -1.0 : 1.0) * m(i, i).real();
  }
  return 0.5 * cfg_.omega * e;
}

CollisionModel::Step CollisionModel::step(const DensityMatrix& compound,
                                          const std::vector<double>& pending_in) const {
  if (compound.dim() != compound_.dim()) throw DimensionMismatch("compound state dimension");
  const std::size_t nb = bath_count();
  if (pending_in.size() != nb) throw InvalidParameter("pending heat per bath expected");

  const ComplexMatrix& rho = compound.matrix();
  const ComplexMatrix rho1 = system_collision_ * rho * system_collision_.adjoint();
  const ComplexMatrix ext = kron(rho1, fresh_);
  const ComplexMatrix rho2 = intra_and_swap_ * ext * intra_and_swap_.adjoint();

  Step out{DensityMatrix::trusted(compound_, partial_trace(rho2, extended_, compound_.labels())),
           {},
           {}};
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& m = memory_labels_[b];
    const auto& f = fresh_labels_[b];
    const double e_before = energy(rho, compound_, m);
    const double e_after_sa = energy(rho1, compound_, m);
    // After the swap the outgoing memory sits in the F slot.
    const double e_out = energy(rho2, extended_, f);
    const double e_new_memory = energy(rho2, extended_, m);

    HeatRecord rec;
    rec.bath = static_cast<int>(b);
    rec.q_intra_in = pending_in[b];
    rec.q_sa = e_after_sa - e_before;
    rec.q_intra_out = e_out - e_after_sa;
    rec.q_lifecycle = rec.q_intra_in + rec.q_sa + rec.q_intra_out;
    out.heat.push_back(rec);
    out.incoming_heat.push_back(e_new_memory - fresh_energy_[b]);
  }
  return out;
}

StepChannel CollisionModel::channel() const {
  std::vector<ComplexMatrix> ops;
  ops.reserve(kraus_.size());
  for (const auto& k : kraus_) ops.push_back(std::sqrt(k.first_weight) * k.op);
  std::ostringstream desc;
  desc << "setting " << to_string(cfg_.setting) << (cfg_.delta == 0.0 ? " markovian" : " embedded")
       << " compound";
  return StepChannel::from_kraus(compound_, ops, desc.str());
}

StepChannel markovian_step_channel(const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.delta != 0.0) throw InvalidParameter("markovian channel requires delta == 0");
  const UnitaryOp u = collision_unitary(cfg);
  const std::size_t nb = cfg.bath_count();
  const auto df = static_cast<Eigen::Index>(std::size_t{1} << nb);

  std::vector<std::vector<LevelWeight>> dists;
  for (std::size_t b = 0; b < nb; ++b) dists.push_back(fresh_unit_distribution(cfg, b));

  std::vector<ComplexMatrix> ops;
  const auto levels = all_levels(nb);
  for (const auto& first : levels) {
    double w = 1.0;
    for (std::size_t b = 0; b < nb; ++b) {
      double p = 0.0;
      for (const auto& lw : dists[b]) {
        if (lw.level == first[b]) p = lw.weight;
      }
      w *= p;
    }
    if (w <= 0.0) continue;
    const auto k = static_cast<Eigen::Index>(level_index(first));
    for (const auto& second : levels) {
      const auto a = static_cast<Eigen::Index>(level_index(second));
      ComplexMatrix op(2, 2);
      for (Eigen::Index r = 0; r < 2; ++r)
        for (Eigen::Index c = 0; c < 2; ++c) op(r, c) = std::sqrt(w) * u.matrix()(r * df + a, c * df + k);
      ops.push_back(std::move(op));
    }
  }
  return StepChannel::from_kraus(QubitRegister{"S"}, ops,
                                 "setting " + to_string(cfg.setting) + " markovian system");
}

StepChannel embedded_step_channel(const ModelConfig& cfg) { return CollisionModel(cfg).channel(); }

DensityMatrix steady_state(const StepChannel& channel) {
  const ComplexMatrix& s = channel.superoperator();
  // The complex Schur iteration can stall on the very sparse, defective
  // superoperators of memoryless steps; a diagonal shift leaves the
  // eigenvectors unchanged and breaks the stall.
  const ComplexMatrix id = ComplexMatrix::Identity(s.rows(), s.cols());
  Eigen::ComplexEigenSolver<ComplexMatrix> es;
  Complex shift{0.0, 0.0};
  for (const Complex c : {Complex(0.0, 0.0), Complex(0.5, 0.0), Complex(0.0, 0.5)}) {
    shift = c;
    es.compute(c == Complex(0.0, 0.0) ? s : ComplexMatrix(s + c * id), true);
    if (es.info() == Eigen::Success) break;
  }
  if (es.info() != Eigen::Success) throw Error("steady_state: eigensolver failed");

  std::size_t on_circle = 0;
  Eigen::Index best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const Complex lambda = es.eigenvalues()(k) - shift;
    if (std::abs(std::abs(lambda) - 1.0) < kUnitCircleTolerance) ++on_circle;
    const double gap = std::abs(lambda - Complex(1.0, 0.0));
    if (gap < best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  if (on_circle > 1) {
    std::ostringstream os;
    os << "channel has " << on_circle << " eigenvalues on the unit circle";
    throw NonUniqueSteadyState(os.str(), on_circle);
  }
  const auto d = static_cast<Eigen::Index>(channel.reg().dim());
  return normalized_state(channel.reg(), unvectorize(es.eigenvectors().col(best), d));
}

DensityMatrix steady_state_power(const StepChannel& channel) {
  ComplexMatrix p = channel.superoperator();
  // Round-off puts the leading eigenvalue at 1 + O(eps), which squaring
  // amplifies; stop once the change starts growing after convergence.
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 96; ++k) {
    ComplexMatrix next = p * p;
    const double change = max_abs(next - p);
    if (last < 1e-9 && change >= last) break;
    p = std::move(next);
    last = change;
    if (change < 1e-15) break;
  }
  const auto d = static_cast<Eigen::Index>(channel.reg().dim());
  const ComplexMatrix mixed = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  return normalized_state(channel.reg(), unvectorize(p * vectorize(mixed), d));
}

std::vector<EvolutionSample> evolve(const ModelConfig& cfg, const DensityMatrix& rho0_s,
                                    std::size_t n_steps) {
  if (n_steps == 0) throw InvalidParameter("evolve needs at least one step");
  const CollisionModel model(cfg);
  const DensityMatrix gibbs = gibbs_qubit(cfg.beta, cfg.omega);
  const std::vector<std::string> sys{"S"};

  auto sample = [&](std::size_t n, const DensityMatrix& compound, std::vector<HeatRecord> heat) {
    EvolutionSample s{n, static_cast<double>(n) * cfg.dt, partial_trace(compound, sys),
                      std::move(heat), 0.0, {}};
    s.fidelity_to_gibbs = fidelity(s.rho_s, gibbs);
    try {
      s.beta_e = effective_temperature(s.rho_s, cfg.omega);
    } catch (const NotDiagonal&) {
      s.beta_e = EffectiveTemperature{std::numeric_limits<double>::quiet_NaN(),
                                      std::numeric_limits<double>::quiet_NaN(), false};
    }
    return s;
  };

  std::vector<EvolutionSample> out;
  out.reserve(n_steps + 1);
  DensityMatrix compound = model.initial_compound(rho0_s);
  std::vector<double> pending(model.bath_count(), 0.0);
  out.push_back(sample(0, compound, {}));
  for (std::size_t n = 1; n <= n_steps; ++n) {
    auto st = model.step(compound, pending);
    compound = std::move(st.compound);
    pending = std::move(st.incoming_heat);
    out.push_back(sample(n, compound, std::move(st.heat)));
  }
  return out;
}

HeatFlux steady_heat_flux(const ModelConfig& cfg) {
  const CollisionModel model(cfg);
  return steady_heat_flux(model, steady_state(model.channel()));
}

HeatFlux steady_heat_flux(const CollisionModel& model, const DensityMatrix& steady) {
  const auto st = model.step(steady, std::vector<double>(model.bath_count(), 0.0));
  HeatFlux flux;
  for (const auto& rec : st.heat) flux.per_bath.push_back(rec.q_sa / model.config().dt);
  return flux;
}

}  // namespace collideq
