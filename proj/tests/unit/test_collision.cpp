#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "collideq/collision.hpp"
#include "collideq/errors.hpp"
#include "testing.hpp"

using namespace collideq;
using collideq::testing::random_state;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

ModelConfig config(Setting s, double beta, double dt, double delta = 0.0) {
  ModelConfig c;
  c.setting = s;
  c.beta = beta;
  c.dt = dt;
  c.delta = delta;
  return c;
}

double unitarity_defect(const ComplexMatrix& u) {
  return max_abs(u * u.adjoint() - ComplexMatrix::Identity(u.rows(), u.cols()));
}

}  // namespace

TEST(ModelConfig, Validation) {
  EXPECT_THROW(config(Setting::I, 1.0, 0.0).validate(), InvalidParameter);
  EXPECT_THROW(config(Setting::I, 1.0, 0.1, kHalfPi).validate(), InvalidParameter);
  EXPECT_THROW(config(Setting::I, 1.0, 0.1, -0.1).validate(), InvalidParameter);
  EXPECT_THROW(config(Setting::I, -1.0, 0.1).validate(), InvalidParameter);
  EXPECT_NO_THROW(config(Setting::II, kZeroTemperature, 0.1, 1.5).validate());
}

TEST(Couplings, MatchRateFormulas) {
  const ModelConfig c = config(Setting::II, 1.0, 0.05);
  const double n = 1.0 / (std::exp(1.0) - 1.0);
  const Couplings k = c.couplings();
  EXPECT_NEAR(k.j, std::sqrt((2 * n + 1) / 0.05), 1e-12);
  EXPECT_NEAR(k.j0, std::sqrt((n + 1) / 0.05), 1e-12);
  EXPECT_NEAR(k.j1, std::sqrt(n / 0.05), 1e-12);
}

TEST(Unitaries, AreUnitary) {
  for (Setting s : {Setting::I, Setting::II}) {
    for (double dt : {1e-3, 0.1, 0.5}) {
      EXPECT_LT(unitarity_defect(collision_unitary(config(s, 1.0, dt)).matrix()), 1e-10);
    }
  }
  const QubitRegister reg{"M", "F"};
  EXPECT_LT(unitarity_defect(intra_bath_unitary(1.4, "M", "F", reg).matrix()), 1e-12);
  EXPECT_THROW(intra_bath_unitary(kHalfPi, "M", "F", reg), InvalidParameter);
}

TEST(Unitaries, ExchangeConservesFreeEnergy) {
  const QubitRegister reg{"S", "A0", "A1"};
  const ComplexMatrix h0 = qubit_hamiltonian(1.0);
  ComplexMatrix free = ComplexMatrix::Zero(8, 8);
  for (const auto& l : reg.labels()) free += embed(h0, {l}, reg);
  const ComplexMatrix hi = heisenberg_interaction(2.3, "S", "A0", reg).matrix() +
                           heisenberg_interaction(0.7, "S", "A1", reg).matrix();
  EXPECT_LT(max_abs(free * hi - hi * free), 1e-12);
}

TEST(Unitaries, ExchangeExponentialIsPartialSwapUpToPhase) {
  // exp(iJtW − iJt/2) for H = −(J/2)(XX+YY+ZZ) = −J·W + J/2.
  const QubitRegister reg{"S", "A"};
  for (double jt : {0.01, 0.3, 1.2}) {
    const UnitaryOp e = expm_i_hermitian(heisenberg_interaction(jt, "S", "A", reg), 1.0);
    const UnitaryOp p = partial_swap(-jt, "S", "A", reg);
    EXPECT_TRUE(approx_equal(e.matrix(), std::exp(Complex(0.0, -jt / 2)) * p.matrix(), 1e-12));
  }
}

TEST(MarkovianStep, SettingIHomogenizesDiagonalStates) {
  // For commuting ρ and η the partial swap gives cos²θ ρ + sin²θ η exactly.
  const ModelConfig c = config(Setting::I, 0.8, 0.07);
  const double theta = c.couplings().j * c.dt;
  ComplexMatrix inverted = ComplexMatrix::Zero(2, 2);
  inverted(0, 0) = 0.7;
  inverted(1, 1) = 0.3;
  const DensityMatrix rho(QubitRegister{"S"}, inverted);
  const DensityMatrix eta = gibbs_qubit(0.8, 1.0);
  const MarkovianStep st = markovian_step(c, rho);
  const ComplexMatrix oracle = std::pow(std::cos(theta), 2) * rho.matrix() + std::pow(std::sin(theta), 2) * eta.matrix();
  EXPECT_TRUE(approx_equal(st.state.matrix(), oracle, 1e-14));
  // Heat into the unit is minus the system's energy change.
  const ComplexMatrix h = qubit_hamiltonian(1.0);
  const double de_s = (h * (st.state.matrix() - rho.matrix())).trace().real();
  EXPECT_NEAR(st.heat[0].q_sa, -de_s, 1e-14);
}

TEST(MarkovianStep, ChannelMatchesDirectStepOnRandomStates) {
  std::mt19937_64 rng(31);
  for (Setting s : {Setting::I, Setting::II}) {
    const ModelConfig c = config(s, 1.3, 0.2);
    const StepChannel ch = markovian_step_channel(c);
    for (int trial = 0; trial < 10; ++trial) {
      const DensityMatrix rho = random_state(QubitRegister{"S"}, rng);
      EXPECT_TRUE(approx_equal(ch.apply(rho).matrix(), markovian_step(c, rho).state.matrix(), 1e-13));
    }
  }
  EXPECT_THROW(markovian_step(config(Setting::I, 1.0, 0.1, 0.2), gibbs_qubit(1.0, 1.0)), InvalidParameter);
}

TEST(MarkovianStep, SettingIIHeatsBalanceSystemEnergy) {
  const ModelConfig c = config(Setting::II, 0.5, 0.3);
  DensityMatrix rho = excited_state();
  const ComplexMatrix h = qubit_hamiltonian(1.0);
  for (int n = 0; n < 20; ++n) {
    const MarkovianStep st = markovian_step(c, rho);
    const double de_s = (h * (st.state.matrix() - rho.matrix())).trace().real();
    EXPECT_NEAR(de_s + st.heat[0].q_sa + st.heat[1].q_sa, 0.0, 1e-13);
    rho = st.state;
  }
}

TEST(StepChannel, EmbeddedChannelIsCptp) {
  for (Setting s : {Setting::I, Setting::II}) {
    const CollisionModel m(config(s, 2.0, 0.1, 1.2));
    const StepChannel ch = m.channel();
    const auto es = eig_hermitian(ch.choi(), 1e-10);
    EXPECT_GT(es.values.front(), -1e-12);
    ComplexMatrix sum = ComplexMatrix::Zero(m.compound_register().dim(), m.compound_register().dim());
    for (const auto& k : m.kraus()) sum += k.first_weight * k.op.adjoint() * k.op;
    EXPECT_TRUE(approx_equal(sum, ComplexMatrix::Identity(sum.rows(), sum.cols()), 1e-12));
  }
}

TEST(StepChannel, KrausBranchesReproduceUnitaryStep) {
  std::mt19937_64 rng(32);
  const CollisionModel m(config(Setting::II, 1.0, 0.15, 0.9));
  const DensityMatrix rho = random_state(m.compound_register(), rng);
  const auto st = m.step(rho, {0.0, 0.0});
  EXPECT_TRUE(approx_equal(m.channel().apply(rho).matrix(), st.compound.matrix(), 1e-13));
}

TEST(Embedding, ZeroDeltaMatchesMarkovianRecursionFor200Steps) {
  for (Setting s : {Setting::I, Setting::II}) {
    const ModelConfig c = config(s, 2.0, 0.05);
    const CollisionModel m(c);
    const StepChannel ch = m.channel();
    DensityMatrix compound = m.initial_compound(bloch_state(0.9, 0.4));
    DensityMatrix direct = bloch_state(0.9, 0.4);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
      compound = ch.apply(compound);
      direct = markovian_step(c, direct).state;
      worst = std::max(worst, max_abs(partial_trace(compound, {"S"}).matrix() - direct.matrix()));
    }
    EXPECT_LT(worst, 1e-10) << to_string(s);
  }
}

TEST(SteadyState, EigenAndPowerRoutesAgree) {
  for (Setting s : {Setting::I, Setting::II}) {
    for (double delta : {0.0, 0.7, 1.3}) {
      const StepChannel ch = embedded_step_channel(config(s, 2.0, 0.1, delta));
      const DensityMatrix a = steady_state(ch);
      const DensityMatrix b = steady_state_power(ch);
      EXPECT_LT(max_abs(a.matrix() - b.matrix()), 1e-12) << to_string(s) << " delta " << delta;
      EXPECT_LT(max_abs(ch.apply(a).matrix() - a.matrix()), 1e-12);
    }
  }
}

TEST(SteadyState, SettingIFactorizesIntoGibbsStates) {
  for (double delta : {0.0, 0.5, 0.8 * kHalfPi, 0.95 * kHalfPi}) {
    const ModelConfig c = config(Setting::I, 0.5, 0.01, delta);
    const DensityMatrix ss = steady_state(embedded_step_channel(c));
    const ComplexMatrix product = kron(gibbs_qubit(0.5, 1.0).matrix(), gibbs_qubit(0.5, 1.0, "M").matrix());
    EXPECT_LT(max_abs(ss.matrix() - product), 1e-8) << "delta " << delta;
  }
}

TEST(SteadyState, DegenerateChannelIsReported) {
  const QubitRegister reg{"S"};
  const StepChannel id(reg, ComplexMatrix::Identity(4, 4), "identity");
  try {
    steady_state(id);
    FAIL() << "identity channel has no unique fixed point";
  } catch (const NonUniqueSteadyState& e) {
    EXPECT_EQ(e.multiplicity(), 4u);
  }
  // Any unitary channel keeps all its eigenvalues on the unit circle.
  const StepChannel z(reg, kron(pauli::z(), pauli::z().conjugate()), "sigma_z conjugation");
  EXPECT_THROW(steady_state(z), NonUniqueSteadyState);
}

TEST(Heat, SettingIIMarkovianHeatsCancelAtSteadyState) {
  for (double beta : {0.5, 2.0}) {
    for (double dt : {0.01, 0.1, 0.4}) {
      const ModelConfig c = config(Setting::II, beta, dt);
      DensityMatrix rho = partial_trace(steady_state(embedded_step_channel(c)), {"S"});
      for (int n = 0; n < 50; ++n) {
        const MarkovianStep st = markovian_step(c, rho);
        EXPECT_LT(std::abs(st.heat[0].q_sa + st.heat[1].q_sa), 1e-12);
        rho = st.state;
      }
    }
  }
}

TEST(Heat, EmbeddedEnergyBalanceDuringTransients) {
  for (Setting s : {Setting::I, Setting::II}) {
    const CollisionModel m(config(s, 1.0, 0.1, 1.1));
    DensityMatrix rho = m.initial_compound(excited_state());
    std::vector<double> pending(m.bath_count(), 0.0);
    for (int n = 0; n < 40; ++n) {
      const auto st = m.step(rho, pending);
      const double de_s = m.energy(st.compound.matrix(), m.compound_register(), "S") -
                          m.energy(rho.matrix(), m.compound_register(), "S");
      double total = de_s;
      for (std::size_t b = 0; b < m.bath_count(); ++b) {
        const HeatRecord& h = st.heat[b];
        total += h.q_sa + h.q_intra_out + st.incoming_heat[b];
        EXPECT_NEAR(h.q_lifecycle, h.q_intra_in + h.q_sa + h.q_intra_out, 1e-15);
        EXPECT_NEAR(h.q_intra_in, pending[b], 0.0);
        // The intra-bath exchange conserves energy between the two units.
        EXPECT_NEAR(h.q_intra_out + st.incoming_heat[b], 0.0, 1e-12);
      }
      EXPECT_NEAR(total, 0.0, 1e-10);
      rho = st.compound;
      pending = st.incoming_heat;
    }
  }
}

TEST(Heat, SettingISteadyFluxVanishes) {
  for (double delta : {0.0, 1.0, 1.45}) {
    const HeatFlux f = steady_heat_flux(config(Setting::I, 2.0, 0.05, delta));
    ASSERT_EQ(f.per_bath.size(), 1u);
    EXPECT_LT(std::abs(f.per_bath[0]), 1e-12);
  }
  const HeatFlux f2 = steady_heat_flux(config(Setting::II, 1.0, 0.1));
  ASSERT_EQ(f2.per_bath.size(), 2u);
  // Heat flows into the ground-state bath and out of the excited one.
  EXPECT_GT(f2.per_bath[0], 0.0);
  EXPECT_NEAR(f2.per_bath[0] + f2.per_bath[1], 0.0, 1e-11);
}

TEST(Evolve, SamplesAndDiagnostics) {
  const ModelConfig c = config(Setting::I, 2.0, 0.1, 0.3);
  const auto s = evolve(c, excited_state(), 30);
  ASSERT_EQ(s.size(), 31u);
  EXPECT_TRUE(s.front().heat.empty());
  EXPECT_EQ(s[10].step, 10u);
  EXPECT_NEAR(s[10].t, 1.0, 1e-15);
  EXPECT_NEAR(s.front().fidelity_to_gibbs, fidelity(excited_state(), gibbs_qubit(2.0, 1.0)), 1e-15);
  EXPECT_TRUE(s.back().beta_e.valid);
  EXPECT_THROW(evolve(c, excited_state(), 0), InvalidParameter);
}

TEST(SettingII, SmallStepApproachesCanonicalState) {
  for (double beta : {0.5, 2.0}) {
    const auto ss = partial_trace(steady_state(embedded_step_channel(config(Setting::II, beta, 1e-4))), {"S"});
    const EffectiveTemperature te = effective_temperature(ss, 1.0);
    EXPECT_NEAR(te.g_e, std::tanh(beta / 2), 1e-3);
  }
}
