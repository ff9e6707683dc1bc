#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace timeavg;
using testing_support::max_abs;
using testing_support::Rng;

namespace {

Operator plus_state() {
  Vector psi(2);
  psi << 1.0, 1.0;
  psi /= std::sqrt(2.0);
  return psi * psi.adjoint();
}

Operator unitary_from_hermitian(const Operator &k, double t) {
  Eigen::SelfAdjointEigenSolver<Operator> es(k);
  const Eigen::VectorXcd phases = (-kI * t * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

TEST(TimeGridType, Validation) {
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0.0), ValidationError);
  EXPECT_THROW(TimeGrid(1.0, 1.0, 0.1), ValidationError);
  EXPECT_THROW(TimeGrid(0.0, 1e8, 1.0 - 1e-9), ValidationError);
  const TimeGrid g(0.0, 1.0, 0.1);
  EXPECT_EQ(g.steps(), 10);
  EXPECT_EQ(g.points(), 11u);
  EXPECT_DOUBLE_EQ(g.time(10), 1.0);
}

TEST(PropagateExact, ZeroHamiltonianIsConstant) {
  Rng rng(61);
  const DensityMatrix rho0(rng.density(3));
  const auto traj = propagate_exact(FourierOperator(3, 3), rho0, TimeGrid(0, 5, 0.1));
  ASSERT_EQ(traj.states.size(), 51u);
  for (const auto &rho : traj.states)
    EXPECT_EQ(max_abs(rho - rho0.op()), 0.0);
}

TEST(PropagateExact, DiagonalHamiltonianPhase) {
  const double e1 = 0.7, e2 = -0.4;
  Operator h0 = Operator::Zero(2, 2);
  h0(0, 0) = e1;
  h0(1, 1) = e2;
  const DensityMatrix rho0(plus_state());
  const auto traj = propagate_exact(FourierOperator::constant(h0), rho0, TimeGrid(0, 10, 0.001));
  for (std::size_t k = 0; k < traj.times.size(); k += 1000) {
    const Complex expected = 0.5 * std::exp(-kI * ((e1 - e2) * traj.times[k]));
    EXPECT_LE(std::abs(traj.states[k](0, 1) - expected), 1e-10);
  }
}

TEST(PropagateExact, AcStarkMatchesRotatingFrameExponential) {
  const double rabi = 0.3, delta = 1.0;
  const auto h = ac_stark_hamiltonian(rabi, delta);
  Operator k = 0.5 * rabi * (ket_bra(2, 0, 1) + ket_bra(2, 1, 0));
  k(1, 1) -= delta;
  const DensityMatrix rho0(plus_state());
  const TimeGrid grid(0.0, 50.0, 0.005);
  const auto traj = propagate_exact(h.to_fourier(), rho0, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); i += 500) {
    const double t = traj.times[i];
    Operator r = Operator::Identity(2, 2);
    r(1, 1) = std::exp(-kI * (delta * t));
    const Operator u = r * unitary_from_hermitian(k, t);
    worst = std::max(worst, max_abs(traj.states[i] - u * rho0.op() * u.adjoint()));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(PropagateExact, PurityConservedAtDefaultStep) {
  const auto h = ac_stark_hamiltonian(0.3, 1.0);
  const auto traj = propagate_exact(h.to_fourier(), DensityMatrix(plus_state()), TimeGrid(0, 100, default_step(h)));
  for (const auto &rho : traj.states)
    EXPECT_NEAR((rho * rho).trace().real(), 1.0, 1e-8);
  EXPECT_EQ(traj.stats.positivity_warnings, 0u);
}

TEST(PropagateExact, RejectsNonHermitianHamiltonianAndMismatch) {
  FourierOperator bad(2, 2);
  bad.add_term(ket_bra(2, 0, 1), 1.0, 0);
  const DensityMatrix rho0(plus_state());
  EXPECT_THROW(propagate_exact(bad, rho0, TimeGrid(0, 1, 0.1)), PropagationError);
  EXPECT_THROW(propagate_exact(FourierOperator(3, 3), rho0, TimeGrid(0, 1, 0.1)), DimensionError);
}

TEST(PropagateEffective, AcStarkCoherenceRotatesAtShift) {
  const double rabi = 0.3, delta = 1.0;
  const EffectiveGenerator gen(ac_stark_hamiltonian(rabi, delta));
  const auto traj = propagate_effective(gen, DensityMatrix(plus_state()), TimeGrid(0, 200, 0.05));
  const double shift = rabi * rabi / (2.0 * delta);
  for (std::size_t k = 0; k < traj.times.size(); k += 200)
    EXPECT_LE(std::abs(traj.states[k](0, 1) - 0.5 * std::exp(-kI * (shift * traj.times[k]))), 1e-10);
}

TEST(PropagateEffective, SingleFrequencyPurityConstant) {
  Rng rng(62);
  const auto h = rng.harmonic(3, {1.0});
  const EffectiveGenerator gen(h);
  const DensityMatrix rho0(rng.density(3));
  const auto traj = propagate_effective(gen, rho0, TimeGrid(0, 100, 0.01));
  for (const auto &rho : traj.states)
    EXPECT_NEAR((rho * rho).trace().real(), rho0.purity(), 1e-9);
}

TEST(PropagateEffective, ZeroGeneratorIsConstant) {
  const EffectiveGenerator gen{HarmonicHamiltonian(Operator::Zero(2, 2))};
  const DensityMatrix rho0(plus_state());
  const auto traj = propagate_effective(gen, rho0, TimeGrid(0, 3, 0.1));
  for (const auto &rho : traj.states)
    EXPECT_EQ(max_abs(rho - rho0.op()), 0.0);
}

TEST(Propagate, TraceDriftIsRenormalizedAndCounted) {
  const DensityMatrix rho0(plus_state());
  const DensityRhs leak = [](const Operator &rho, double) -> Operator {
    return 1e-3 * Operator::Identity(rho.rows(), rho.cols());
  };
  const auto stats = propagate(leak, rho0, TimeGrid(0, 1, 0.1), nullptr);
  EXPECT_EQ(stats.trace_renormalizations, 10u);
}

TEST(Propagate, PositivityViolationsAreWarnedNotClamped) {
  Operator start = Operator::Zero(2, 2);
  start(1, 1) = 1.0;
  const DensityRhs drain = [](const Operator &, double) -> Operator {
    return ket_bra(2, 0, 0) - ket_bra(2, 1, 1);
  };
  double last_min = 0.0;
  const auto stats = propagate(drain, DensityMatrix(start), TimeGrid(0, 2, 0.1),
                               [&](const Operator &, const StepMonitor &m) { last_min = m.min_eigenvalue; });
  EXPECT_GT(stats.positivity_warnings, 0u);
  EXPECT_NEAR(stats.first_positivity_warning_time, 1.1, 1e-12);
  EXPECT_NEAR(last_min, -1.0, 1e-12);
}

TEST(DefaultStep, UsesFastestScale) {
  EXPECT_NEAR(default_step(ac_stark_hamiltonian(0.3, 1.0)), 0.05, 1e-15);
  EXPECT_NEAR(default_step(ac_stark_hamiltonian(0.3, 4.0)), 0.0125, 1e-15);
}
