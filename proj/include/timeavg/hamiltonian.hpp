// Harmonic Hamiltonians  H(t) = H0 + sum_n h_n e^{-i w_n t} + h_n^dagger e^{+i w_n t}.

#pragma once

#include "timeavg/fourier.hpp"
#include "timeavg/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace timeavg {

struct HarmonicTerm {
  Operator h;
  double omega = 0.0;
};

class HarmonicHamiltonian {
public:
  HarmonicHamiltonian(Operator h0, std::vector<HarmonicTerm> terms) : h0_(std::move(h0)), terms_(std::move(terms)) {
    detail::require_square(h0_, "HarmonicHamiltonian");
    if (!h0_.allFinite())
      throw ValidationError("HarmonicHamiltonian: H0 has non-finite entries");
    if (hermiticity_violation(h0_) > 1e-12)
      throw ValidationError("HarmonicHamiltonian: H0 is not Hermitian");
    for (std::size_t n = 0; n < terms_.size(); ++n) {
      const auto &t = terms_[n];
      if (t.h.rows() != h0_.rows() || t.h.cols() != h0_.cols())
        throw DimensionError("HarmonicHamiltonian: term " + std::to_string(n) + " has the wrong dimension");
      if (!t.h.allFinite())
        throw ValidationError("HarmonicHamiltonian: term " + std::to_string(n) + " has non-finite entries");
      if (!(t.omega > 0.0) || !std::isfinite(t.omega))
        throw ValidationError("HarmonicHamiltonian: term " + std::to_string(n) + " needs a positive frequency");
    }
  }

  explicit HarmonicHamiltonian(Operator h0) : HarmonicHamiltonian(std::move(h0), {}) {}

  Eigen::Index dim() const { return h0_.rows(); }
  const Operator &h0() const { return h0_; }
  const std::vector<HarmonicTerm> &terms() const { return terms_; }

  double min_omega() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto &t : terms_)
      w = std::min(w, t.omega);
    return w;
  }

  double max_omega() const {
    double w = 0.0;
    for (const auto &t : terms_)
      w = std::max(w, t.omega);
    return w;
  }

  Operator operator()(double t) const {
    Operator out = h0_;
    for (const auto &term : terms_) {
      const Complex phase = std::exp(-kI * (term.omega * t));
      out += phase * term.h + std::conj(phase) * term.h.adjoint();
    }
    return out;
  }

  FourierOperator to_fourier() const {
    FourierOperator out(dim(), dim());
    out.add_term(h0_, 0.0, 0);
    for (const auto &term : terms_) {
      out.add_term(term.h, -term.omega, 0);
      out.add_term(term.h.adjoint(), term.omega, 0);
    }
    return out;
  }

  /// Default averaging cutoff: half the slowest drive frequency.
  AveragingFilter default_filter() const {
    if (terms_.empty())
      return AveragingFilter::transparent();
    return AveragingFilter(0.5 * min_omega());
  }

private:
  Operator h0_;
  std::vector<HarmonicTerm> terms_;
};

/// Two-level atom driven off resonance:
/// H = (Omega/2)(|2><1| e^{-i Delta t} + |1><2| e^{i Delta t}).
inline HarmonicHamiltonian ac_stark_hamiltonian(double rabi, double detuning) {
  return HarmonicHamiltonian(Operator::Zero(2, 2), {{0.5 * rabi * ket_bra(2, 1, 0), detuning}});
}

/// Lambda system: levels 1 and 2 each coupled to level 3.
inline HarmonicHamiltonian raman_hamiltonian(double rabi1, double rabi2, double omega1, double omega2) {
  return HarmonicHamiltonian(Operator::Zero(3, 3),
                             {{0.5 * rabi1 * ket_bra(3, 2, 0), omega1}, {0.5 * rabi2 * ket_bra(3, 2, 1), omega2}});
}

} // namespace timeavg
