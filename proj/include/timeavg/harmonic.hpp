// Closed-form second-order generator for harmonic Hamiltonians.
//
// With L_m = h_m e^{-i w_m t} and 1/w^{+-}_{nm} = (1/w_n +- 1/w_m)/2,
//
//   i d(rho)/dt = [H_eff, rho]
//               + sum_{n,m} (1/w^-_{nm}) ( {L_m^dag L_n, rho} - 2 L_n rho L_m^dag
//                                        + {L_n L_m^dag, rho} - 2 L_m^dag rho L_n )
//
//   H_eff = H0 + sum_{n,m} (1/w^+_{nm}) [h_m^dag, h_n] e^{i(w_m - w_n) t}.
//
// hbar = 1 throughout.

#pragma once

#include "timeavg/fourier.hpp"
#include "timeavg/hamiltonian.hpp"
#include "timeavg/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace timeavg {

struct InvOmegaPm {
  double plus = 0.0;
  double minus = 0.0;
};

/// (1/w^+_{nm}, 1/w^-_{nm}). Frequencies within kFrequencyTolerance count as
/// equal, which makes the difference exactly zero.
inline InvOmegaPm inv_omega_pm(const HarmonicHamiltonian &h, std::size_t n, std::size_t m) {
  const auto &terms = h.terms();
  if (n >= terms.size() || m >= terms.size())
    throw std::out_of_range("inv_omega_pm: index out of range");
  const double wn = terms[n].omega;
  const double wm = terms[m].omega;
  InvOmegaPm r;
  r.plus = 0.5 * (1.0 / wn + 1.0 / wm);
  r.minus = (n == m || std::abs(wn - wm) <= kFrequencyTolerance) ? 0.0 : 0.5 * (1.0 / wn - 1.0 / wm);
  return r;
}

/// U_1(t) = (t - t0) H0 / i + V_1(t) - V_1(t0),
/// V_1(t) = sum_n (h_n e^{-i w_n t} - h_n^dag e^{i w_n t}) / w_n.
inline FourierOperator u1_closed_form(const HarmonicHamiltonian &h, double t0) {
  const Eigen::Index d = h.dim();
  FourierOperator v1(d, d);
  for (const auto &term : h.terms()) {
    v1.add_term(term.h / term.omega, -term.omega, 0);
    v1.add_term(-term.h.adjoint() / term.omega, term.omega, 0);
  }
  FourierOperator u1(d, d);
  u1.add_term(-kI * h.h0(), 0.0, 1);
  u1.add_term(kI * t0 * h.h0(), 0.0, 0);
  u1 += v1;
  u1.add_term(-v1(t0), 0.0, 0);
  return u1;
}

class EffectiveGenerator {
public:
  explicit EffectiveGenerator(HarmonicHamiltonian h) : source_(std::move(h)) {
    const Eigen::Index d = source_.dim();
    const Operator id = Operator::Identity(d, d);
    heff_ = FourierOperator(d, d);
    heff_.add_term(source_.h0(), 0.0, 0);
    decoherence_ = FourierSuperoperator(d * d, d * d);

    const auto &terms = source_.terms();
    for (std::size_t n = 0; n < terms.size(); ++n) {
      for (std::size_t m = 0; m < terms.size(); ++m) {
        const auto w = inv_omega_pm(source_, n, m);
        const Operator &hn = terms[n].h;
        const Operator hm_dag = terms[m].h.adjoint();
        const double beat = terms[m].omega - terms[n].omega;
        const Operator a = hm_dag * hn;
        const Operator b = hn * hm_dag;
        heff_.add_term(w.plus * (a - b), beat, 0);
        if (w.minus == 0.0)
          continue;
        pairs_.push_back({a + b, hn, hm_dag, w.minus, std::abs(beat) <= kFrequencyTolerance ? 0.0 : beat});
        const Operator ab = a + b;
        decoherence_.add_term(w.minus * (sandwich_superop(ab, id) + sandwich_superop(id, ab) -
                                         2.0 * sandwich_superop(hn, hm_dag) - 2.0 * sandwich_superop(hm_dag, hn)),
                              beat, 0);
      }
    }

    generator_ = left_multiplication(heff_) - right_multiplication(heff_) + decoherence_;
  }

  const HarmonicHamiltonian &source() const { return source_; }
  Eigen::Index dim() const { return source_.dim(); }

  /// H_eff as a Fourier series in t.
  const FourierOperator &effective_hamiltonian_series() const { return heff_; }
  /// The Lindblad part D, with i d(rho)/dt = [H_eff, rho] + D[rho].
  const FourierSuperoperator &decoherence_series() const { return decoherence_; }
  /// The full map rho -> i d(rho)/dt.
  const FourierSuperoperator &generator_series() const { return generator_; }

  Operator effective_hamiltonian(double t) const { return heff_(t); }
  Superoperator decoherence_superop(double t) const { return decoherence_(t); }

  /// D(t)[rho] evaluated directly on the operator.
  Operator decoherence(const Operator &rho, double t) const {
    Operator out = Operator::Zero(rho.rows(), rho.cols());
    for (const auto &p : pairs_) {
      const Complex phase = p.beat == 0.0 ? Complex(1.0) : std::exp(kI * (p.beat * t));
      out += (p.inv_minus * phase) *
             (p.anti * rho + rho * p.anti - 2.0 * (p.hn * rho * p.hm_dag) - 2.0 * (p.hm_dag * rho * p.hn));
    }
    return out;
  }

  /// d(rho)/dt.
  Operator master_rhs(const Operator &rho, double t) const {
    if (rho.rows() != dim() || rho.cols() != dim())
      throw DimensionError("master_rhs: state dimension " + std::to_string(rho.rows()) + " does not match generator " +
                           std::to_string(dim()));
    const Operator heff = heff_(t);
    return -kI * (heff * rho - rho * heff + decoherence(rho, t));
  }

  /// Matrix of rho -> d(rho)/dt at time t.
  Superoperator liouvillian(double t) const { return -kI * generator_(t); }

private:
  struct Pair {
    Operator anti;
    Operator hn;
    Operator hm_dag;
    double inv_minus;
    double beat;
  };

  HarmonicHamiltonian source_;
  FourierOperator heff_;
  FourierSuperoperator decoherence_;
  FourierSuperoperator generator_;
  std::vector<Pair> pairs_;
};

inline Operator effective_hamiltonian(const EffectiveGenerator &gen, double t) {
  return gen.effective_hamiltonian(t);
}

inline Superoperator decoherence_superop(const EffectiveGenerator &gen, double t) {
  return gen.decoherence_superop(t);
}

inline Operator master_rhs(const EffectiveGenerator &gen, const Operator &rho, double t) {
  return gen.master_rhs(rho, t);
}

} // namespace timeavg
