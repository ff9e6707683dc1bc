#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace timeavg;
using testing_support::max_abs;
using testing_support::Rng;

namespace {

// Independent term-list arithmetic: no merging, no ordering, integration by
// parts done recursively.
struct Term {
  Operator c;
  double nu;
  int p;
};
using Terms = std::vector<Term>;

Operator eval(const Terms &f, double t, Eigen::Index d) {
  Operator out = Operator::Zero(d, d);
  for (const auto &x : f)
    out += x.c * std::pow(t, x.p) * std::exp(Complex(0.0, x.nu * t));
  return out;
}

// Antiderivative of c s^p e^{i nu s}.
void antiderivative(const Operator &c, double nu, int p, Terms &out) {
  if (nu == 0.0) {
    out.push_back({c / double(p + 1), 0.0, p + 1});
    return;
  }
  const Complex inu(0.0, nu);
  out.push_back({c / inu, nu, p});
  if (p > 0)
    antiderivative(-double(p) * c / inu, nu, p - 1, out);
}

Terms integrate(const Terms &f, double t0, Eigen::Index d) {
  Terms out;
  for (const auto &x : f)
    antiderivative(x.c, x.nu, x.p, out);
  const Operator at_t0 = eval(out, t0, d);
  out.push_back({-at_t0, 0.0, 0});
  return out;
}

Terms multiply(const Terms &a, const Terms &b) {
  Terms out;
  for (const auto &x : a)
    for (const auto &y : b)
      out.push_back({x.c * y.c, x.nu + y.nu, x.p + y.p});
  return out;
}

Terms adjoint(const Terms &a) {
  Terms out;
  for (const auto &x : a)
    out.push_back({x.c.adjoint(), -x.nu, x.p});
  return out;
}

Terms from_harmonic(const HarmonicHamiltonian &h) {
  Terms out{{h.h0(), 0.0, 0}};
  for (const auto &term : h.terms()) {
    out.push_back({term.h, -term.omega, 0});
    out.push_back({term.h.adjoint(), term.omega, 0});
  }
  return out;
}

// avg(A rho B) at time t, ideal filter.
Operator averaged_sandwich(const Terms &a, const Operator &rho, const Terms &b, double cutoff, double t) {
  Operator out = Operator::Zero(rho.rows(), rho.cols());
  for (const auto &x : a)
    for (const auto &y : b) {
      const double nu = x.nu + y.nu;
      if (std::abs(nu) < cutoff)
        out += x.c * rho * y.c * std::pow(t, x.p + y.p) * std::exp(Complex(0.0, nu * t));
    }
  return out;
}

Superoperator compose_sum(const SuperoperatorSeries &f, const SuperoperatorSeries &e, int k, double t) {
  Superoperator s = Superoperator::Zero(e[0].rows(), e[0].cols());
  for (int j = 0; j <= k; ++j)
    s += f[j](t) * e[k - j](t);
  return s;
}

} // namespace

TEST(DysonTerms, ConstantHamiltonianFirstOrder) {
  Rng rng(31);
  const Operator h0 = rng.hermitian(3);
  const double t0 = 0.4;
  const auto u = dyson_terms(FourierOperator::constant(h0), t0, 1);
  for (double t : {0.0, 1.0, 3.5})
    EXPECT_LE(max_abs(u[1](t) - (t - t0) * h0 / kI), 1e-14);
}

TEST(DysonTerms, HarmonicFirstOrderClosedForm) {
  Rng rng(32);
  const auto h = rng.harmonic(2, {1.3});
  const double t0 = -0.25;
  const auto u = dyson_terms(h.to_fourier(), t0, 1);
  const auto &term = h.terms()[0];
  auto v1 = [&](double t) {
    return Operator((term.h * std::exp(-kI * (term.omega * t)) - term.h.adjoint() * std::exp(kI * (term.omega * t))) /
                    term.omega);
  };
  for (double t : {0.0, 0.9, 2.2})
    EXPECT_LE(max_abs(u[1](t) - ((t - t0) * h.h0() / kI + v1(t) - v1(t0))), 1e-13);
}

TEST(DysonTerms, ZeroHamiltonianGivesZeroCorrections) {
  const auto u = dyson_terms(FourierOperator(2, 2), 0.0, 3);
  ASSERT_EQ(u.size(), 4u);
  EXPECT_EQ(max_abs(u[0](1.0) - Operator::Identity(2, 2)), 0.0);
  for (int n = 1; n <= 3; ++n)
    EXPECT_TRUE(u[static_cast<std::size_t>(n)].terms().empty());
}

TEST(DysonTerms, SatisfyRecursionAndInitialCondition) {
  Rng rng(33);
  const auto h = rng.harmonic(3, rng.close_frequencies(2)).to_fourier();
  const double t0 = 0.6;
  const auto u = dyson_terms(h, t0, 3);
  for (int n = 1; n <= 3; ++n) {
    const auto &un = u[static_cast<std::size_t>(n)];
    EXPECT_LE(max_abs(un(t0)), 1e-13);
    for (double t : {-0.5, 1.7})
      EXPECT_LE(max_abs(kI * un.derivative()(t) - h(t) * u[static_cast<std::size_t>(n - 1)](t)), 1e-12);
  }
}

TEST(DysonTerms, RejectsBadInput) {
  EXPECT_THROW(dyson_terms(FourierOperator(2, 2), 0.0, 4), UnsupportedOrder);
  EXPECT_THROW(dyson_terms(FourierOperator(2, 2), 0.0, -1), UnsupportedOrder);
  EXPECT_THROW(dyson_terms(FourierOperator(2, 3), 0.0, 1), DimensionError);
  FourierOperator secular(2, 2);
  secular.add_term(Operator::Identity(2, 2), 0.0, 1);
  EXPECT_THROW(dyson_terms(secular, 0.0, 1), std::invalid_argument);
}

TEST(BuildE, OrderZeroIsIdentity) {
  Rng rng(34);
  const auto h = rng.harmonic(2, {1.0});
  const auto e = build_E(h.to_fourier(), h.default_filter(), 0.0, 0);
  ASSERT_EQ(e.order(), 0);
  EXPECT_EQ(max_abs(e[0](0.7) - identity_superop(2)), 0.0);
}

TEST(BuildE, FirstOrderWithAllDrivesFiltered) {
  Rng rng(35);
  const auto h = rng.harmonic(3, rng.close_frequencies(2));
  const double t0 = 0.3;
  const auto e = build_E(h.to_fourier(), h.default_filter(), t0, 1);
  Operator v1_t0 = Operator::Zero(3, 3);
  for (const auto &term : h.terms())
    v1_t0 += (term.h * std::exp(-kI * (term.omega * t0)) - term.h.adjoint() * std::exp(kI * (term.omega * t0))) /
             term.omega;
  const Operator rho = rng.density(3);
  for (double t : {0.0, 2.0}) {
    const Operator u1_bar = (t - t0) * h.h0() / kI - v1_t0;
    EXPECT_LE(max_abs(timeavg::apply(e[1](t), rho) - (u1_bar * rho + rho * u1_bar.adjoint())), 1e-13);
  }
}

TEST(BuildE, SecondOrderMatchesBruteForceExpansion) {
  Rng rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const auto h = rng.harmonic(2, rng.close_frequencies(2));
    const double t0 = rng.uniform(-1.0, 1.0);
    const auto filter = h.default_filter();
    const auto e = build_E(h.to_fourier(), filter, t0, 2);

    const Terms hs = from_harmonic(h);
    const Terms id{{Operator::Identity(2, 2), 0.0, 0}};
    Terms u1 = integrate(hs, t0, 2);
    for (auto &x : u1)
      x.c *= -kI;
    Terms u2 = integrate(multiply(hs, u1), t0, 2);
    for (auto &x : u2)
      x.c *= -kI;

    const Operator rho = rng.density(2);
    for (double t : {t0, t0 + 0.8, 3.0}) {
      const Operator expected = averaged_sandwich(u2, rho, id, filter.cutoff(), t) +
                                averaged_sandwich(u1, rho, adjoint(u1), filter.cutoff(), t) +
                                averaged_sandwich(id, rho, adjoint(u2), filter.cutoff(), t);
      EXPECT_LE(max_abs(timeavg::apply(e[2](t), rho) - expected), 1e-11) << "trial " << trial << " t " << t;
    }
  }
}

TEST(BuildF, LowOrdersMatchClosedForms) {
  Rng rng(37);
  const auto h = rng.harmonic(2, rng.close_frequencies(2));
  const auto e = build_E(h.to_fourier(), h.default_filter(), 0.2, 3);
  const auto f = build_F(e);
  for (double t : {0.0, 1.5}) {
    EXPECT_LE(max_abs(f[1](t) + e[1](t)), 1e-14);
    EXPECT_LE(max_abs(f[2](t) - (-e[2](t) + e[1](t) * e[1](t))), 1e-12);
  }
}

TEST(BuildF, SeriesInverseOnRandomInputs) {
  Rng rng(38);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = rng.harmonic(rng.integer(2, 3), rng.close_frequencies(rng.integer(1, 2)));
    const auto e = build_E(h.to_fourier(), h.default_filter(), rng.uniform(-1, 1), 3);
    const auto f = build_F(e);
    for (int k = 1; k <= 3; ++k)
      for (double t : {0.0, 2.3})
        EXPECT_LE(compose_sum(f, e, k, t).norm(), 1e-10) << "k = " << k;
  }
}

TEST(BuildL, ZerothOrderVanishesAndFirstIsAveragedCommutator) {
  Rng rng(39);
  const auto h = rng.harmonic(3, rng.close_frequencies(2));
  const auto hf = h.to_fourier();
  const auto filter = h.default_filter();
  const auto l = build_L(hf, filter, 0.0, 2);
  const Operator rho = rng.density(3);
  const auto h_bar = hf.lowpass(filter);
  for (double t : {0.0, 1.2}) {
    EXPECT_EQ(l[0](t).norm(), 0.0);
    EXPECT_LE(max_abs(timeavg::apply(l[1](t), rho) - commutator(h_bar(t), rho)), 1e-14);
  }
}

TEST(BuildL, ConstantHamiltonianIsUnitary) {
  Rng rng(40);
  const Operator h0 = rng.hermitian(3);
  const auto l = build_L(FourierOperator::constant(h0), AveragingFilter::transparent(), 0.5, 3);
  const Operator rho = rng.density(3);
  EXPECT_LE(max_abs(timeavg::apply(l[1](1.0), rho) - commutator(h0, rho)), 1e-14);
  for (double t : {0.0, 2.0}) {
    EXPECT_LE(l[2](t).norm(), 1e-13);
    EXPECT_LE(l[3](t).norm(), 1e-12);
  }
}

TEST(BuildL, TransparentFilterLeavesOnlyFirstOrder) {
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = rng.harmonic(2, rng.close_frequencies(2));
    const auto hf = h.to_fourier();
    const auto l = build_L(hf, AveragingFilter::transparent(), 0.1, 3);
    const Operator rho = rng.density(2);
    for (double t : {0.1, 0.9, 2.0}) {
      EXPECT_LE(max_abs(timeavg::apply(l[1](t), rho) - commutator(hf(t), rho)), 1e-13);
      EXPECT_LE(l[2](t).norm(), 1e-11);
      EXPECT_LE(l[3](t).norm(), 1e-10);
    }
  }
}

TEST(BuildL, SecondOrderMatchesEightTermExpression) {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto h = rng.harmonic(2, rng.close_frequencies(2));
    const auto hf = h.to_fourier();
    const auto filter = h.default_filter();
    const double t0 = rng.uniform(-1, 1);
    const auto l = build_L(hf, filter, t0, 2);
    const auto u1 = u1_closed_form(h, t0);
    const auto u1d = u1.adjoint();
    const auto h_bar = hf.lowpass(filter);
    const auto u1_bar = u1.lowpass(filter);
    const auto u1d_bar = u1d.lowpass(filter);
    const auto hu1 = (hf * u1).lowpass(filter);
    const auto u1dh = (u1d * hf).lowpass(filter);
    const auto h_rho_u1d = sandwich(hf, u1d).lowpass(filter);
    const auto u1_rho_h = sandwich(u1, hf).lowpass(filter);
    const Operator rho = rng.density(2);
    for (double t : {0.0, 0.7, 2.4}) {
      const Operator expected = hu1(t) * rho - h_bar(t) * u1_bar(t) * rho + timeavg::apply(h_rho_u1d(t), rho) -
                                h_bar(t) * rho * u1d_bar(t) - rho * u1dh(t) + rho * u1d_bar(t) * h_bar(t) -
                                timeavg::apply(u1_rho_h(t), rho) + u1_bar(t) * rho * h_bar(t);
      EXPECT_LE(max_abs(timeavg::apply(l[2](t), rho) - expected), 1e-10);
    }
  }
}

TEST(BuildL, TraceAndHermiticityThroughThirdOrder) {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index d = rng.integer(2, 3);
    const auto h = rng.harmonic(d, rng.close_frequencies(rng.integer(1, 3)));
    const auto l = build_L(h.to_fourier(), h.default_filter(), rng.uniform(-1, 1), 3);
    const Operator rho = rng.density(d);
    for (int k = 0; k <= 3; ++k) {
      const Operator out = timeavg::apply(l[k](rng.uniform(0.0, 3.0)), rho) / kI;
      EXPECT_LE(std::abs(out.trace()), 1e-11);
      EXPECT_LE(hermiticity_violation(out), 1e-11);
    }
  }
}

TEST(BuildL, TwoGroupingsOfSecondOrderAgree) {
  Rng rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = rng.harmonic(3, rng.close_frequencies(2));
    const auto hf = h.to_fourier();
    const auto filter = h.default_filter();
    const double t0 = rng.uniform(-1, 1);
    const auto l = build_L(hf, filter, t0, 2);
    const auto first = operator_A(hf, filter, t0);
    const auto d2 = decoherence_D2(hf, filter, t0);
    const auto h_bar = hf.lowpass(filter);
    const Operator rho = rng.density(3);
    for (double t : {0.0, 1.3}) {
      const Operator a = first.A(t);
      const Operator total = timeavg::apply(l[1](t) + l[2](t), rho);
      const Operator with_h_bar = commutator(h_bar(t), rho) + a * rho - rho * a.adjoint() + timeavg::apply(d2(t), rho);
      const Operator with_h_eff = commutator(first.effective_hamiltonian(t), rho) +
                                  anticommutator(0.5 * (a - a.adjoint()), rho) + timeavg::apply(d2(t), rho);
      EXPECT_LE(max_abs(total - with_h_bar), 1e-10);
      EXPECT_LE(max_abs(with_h_bar - with_h_eff), 1e-12);
    }
  }
}

TEST(OperatorA, AcStarkShift) {
  const double rabi = 0.3, detuning = 1.0;
  const auto h = ac_stark_hamiltonian(rabi, detuning);
  for (double t0 : {0.0, 0.77}) {
    const auto first = operator_A(h.to_fourier(), h.default_filter(), t0);
    const Operator expected = -(rabi * rabi / (4.0 * detuning)) * (ket_bra(2, 1, 1) - ket_bra(2, 0, 0));
    EXPECT_LE(max_abs(first.effective_hamiltonian(2.0) - expected), 1e-15);
  }
}

TEST(OperatorA, ConstantHamiltonianHasNoCorrection) {
  Rng rng(45);
  const Operator h0 = rng.hermitian(2);
  const auto first = operator_A(FourierOperator::constant(h0), AveragingFilter::transparent(), 0.0);
  EXPECT_LE(max_abs(first.A(1.7)), 1e-14);
  EXPECT_LE(max_abs(first.effective_hamiltonian(1.7) - h0), 1e-14);
}

TEST(OperatorA, AntiHermitianPartIsTheInverseOmegaMinusAnticommutator) {
  Rng rng(46);
  const auto h = rng.harmonic(3, rng.close_frequencies(2));
  const auto first = operator_A(h.to_fourier(), h.default_filter(), 0.4);
  const auto &terms = h.terms();
  for (double t : {0.0, 2.1}) {
    Operator expected = Operator::Zero(3, 3);
    for (std::size_t n = 0; n < terms.size(); ++n)
      for (std::size_t m = 0; m < terms.size(); ++m) {
        const double inv_minus = 0.5 * (1.0 / terms[n].omega - 1.0 / terms[m].omega);
        const Operator hmd = terms[m].h.adjoint();
        expected += inv_minus * (hmd * terms[n].h + terms[n].h * hmd) *
                    std::exp(kI * ((terms[m].omega - terms[n].omega) * t));
      }
    const Operator a = first.A(t);
    EXPECT_GT(max_abs(a - a.adjoint()), 1e-6);
    EXPECT_LE(max_abs(0.5 * (a - a.adjoint()) - expected), 1e-13);
  }
}

TEST(DecoherenceD2, VanishesForSingleFrequencyAndZeroHamiltonian) {
  Rng rng(47);
  const auto h = rng.harmonic(3, {1.4});
  const auto d2 = decoherence_D2(h.to_fourier(), h.default_filter(), 0.3);
  for (double t : {0.0, 5.0})
    EXPECT_LE(d2(t).norm(), 1e-14);
  const auto zero = decoherence_D2(FourierOperator(2, 2), AveragingFilter(1.0), 0.0);
  EXPECT_EQ(zero(1.0).norm(), 0.0);
}

TEST(ValidityRatio, Examples) {
  EXPECT_NEAR(validity_ratio(ac_stark_hamiltonian(0.3, 1.0)), 0.15, 1e-12);
  EXPECT_EQ(validity_ratio(HarmonicHamiltonian(Operator::Identity(2, 2))), 0.0);
  const double raman = validity_ratio(raman_hamiltonian(0.1, 0.1, 1.0, 1.02));
  EXPECT_NEAR(raman, 0.0707, 0.001);
}
