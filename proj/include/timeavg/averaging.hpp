// Perturbative dynamics of the time-averaged density matrix.
//
// With H -> lambda H, the evolution operator expands as U = sum_n U_n and the
// averaged state as rho_bar = E[rho_0] = sum_k E_k[rho_0] with
//
//   E_k[rho] = sum_{j=0..k} avg( U_{k-j} rho U_j^dagger ).
//
// F = E^{-1} is built order by order from F o E = I, and the averaged state
// obeys  i d(rho_bar)/dt = sum_k L_k[rho_bar]  with
//
//   L_k = sum_{j=0..k} i dE_{k-j}/dt o F_j.
//
// All maps are FourierSuperoperators, so time dependence (including the
// secular t^p pieces coming from a static part of H) is carried exactly and
// averaging is the ideal low-pass filter applied term by term. hbar = 1.

#pragma once

#include "timeavg/fourier.hpp"
#include "timeavg/hamiltonian.hpp"
#include "timeavg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace timeavg {

/// Closed forms exist only through third order; higher orders are rejected.
inline constexpr int kMaxOrder = 3;

class UnsupportedOrder : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SuperoperatorSeries {
  std::vector<FourierSuperoperator> maps;

  int order() const { return static_cast<int>(maps.size()) - 1; }
  const FourierSuperoperator &operator[](int k) const { return maps.at(static_cast<std::size_t>(k)); }

  /// Sum of all orders evaluated at t (lambda = 1).
  Superoperator total(double t) const {
    Superoperator s = maps.front()(t);
    for (std::size_t k = 1; k < maps.size(); ++k)
      s += maps[k](t);
    return s;
  }

  /// Sum of orders first..last evaluated at t.
  Superoperator partial(int first, int last, double t) const {
    Superoperator s = Superoperator::Zero(maps.front().rows(), maps.front().cols());
    for (int k = first; k <= last; ++k)
      s += (*this)[k](t);
    return s;
  }
};

namespace detail {

inline void check_order(int order) {
  if (order < 0 || order > kMaxOrder)
    throw UnsupportedOrder("expansion order " + std::to_string(order) + " outside 0.." + std::to_string(kMaxOrder));
}

inline void check_hamiltonian(const FourierOperator &h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw DimensionError("Hamiltonian must be a non-empty square operator");
  for (const auto &t : h.terms())
    if (t.power != 0)
      throw std::invalid_argument("Hamiltonian must be trigonometric (no t^p factors)");
}

inline FourierOperator identity_series(Eigen::Index dim) {
  return FourierOperator::constant(Operator::Identity(dim, dim));
}

inline FourierSuperoperator identity_superseries(Eigen::Index dim) {
  return FourierSuperoperator::constant(identity_superop(dim));
}

} // namespace detail

/// Dyson terms U_0 .. U_order, with U_0 = I and
/// i dU_n/dt = H U_{n-1},  U_n(t0) = 0 for n >= 1.
inline std::vector<FourierOperator> dyson_terms(const FourierOperator &h, double t0, int order) {
  detail::check_order(order);
  detail::check_hamiltonian(h);
  std::vector<FourierOperator> u;
  u.reserve(static_cast<std::size_t>(order) + 1);
  u.push_back(detail::identity_series(h.rows()));
  for (int n = 1; n <= order; ++n)
    u.push_back(-kI * (h * u.back()).integrate_from(t0));
  return u;
}

inline SuperoperatorSeries build_E(const FourierOperator &h, const AveragingFilter &filter, double t0, int order) {
  const auto u = dyson_terms(h, t0, order);
  std::vector<FourierOperator> u_dag;
  u_dag.reserve(u.size());
  for (const auto &x : u)
    u_dag.push_back(x.adjoint());

  SuperoperatorSeries e;
  e.maps.push_back(detail::identity_superseries(h.rows()));
  for (int k = 1; k <= order; ++k) {
    const Eigen::Index d = h.rows();
    FourierSuperoperator ek(d * d, d * d);
    for (int j = 0; j <= k; ++j)
      ek += sandwich(u[static_cast<std::size_t>(k - j)], u_dag[static_cast<std::size_t>(j)]).lowpass(filter);
    e.maps.push_back(std::move(ek));
  }
  return e;
}

/// Series inverse:  F_0 = I,  F_n = -sum_{j<n} F_j o E_{n-j}.
inline SuperoperatorSeries build_F(const SuperoperatorSeries &e) {
  if (e.maps.empty())
    throw std::invalid_argument("build_F: empty series");
  const Eigen::Index d = superop_dim(e[0](0.0));
  SuperoperatorSeries f;
  f.maps.push_back(detail::identity_superseries(d));
  for (int n = 1; n <= e.order(); ++n) {
    FourierSuperoperator fn(d * d, d * d);
    for (int j = 0; j < n; ++j)
      fn -= f[j] * e[n - j];
    f.maps.push_back(std::move(fn));
  }
  return f;
}

/// Generators L_k from an E-series and its inverse.
inline SuperoperatorSeries build_L(const SuperoperatorSeries &e, const SuperoperatorSeries &f) {
  const Eigen::Index d2 = e[0].rows();
  std::vector<FourierSuperoperator> e_dot;
  for (const auto &ek : e.maps)
    e_dot.push_back(kI * ek.derivative());
  SuperoperatorSeries l;
  for (int k = 0; k <= e.order(); ++k) {
    FourierSuperoperator lk(d2, d2);
    for (int j = 0; j <= k; ++j)
      lk += e_dot[static_cast<std::size_t>(k - j)] * f[j];
    l.maps.push_back(std::move(lk));
  }
  return l;
}

inline SuperoperatorSeries build_L(const FourierOperator &h, const AveragingFilter &filter, double t0, int order) {
  const auto e = build_E(h, filter, t0, order);
  return build_L(e, build_F(e));
}

struct FirstOrderCorrection {
  FourierOperator A;
  /// H_bar + (A + A^dagger)/2.
  FourierOperator effective_hamiltonian;
};

/// A = avg(H U_1) - avg(H) avg(U_1).
inline FirstOrderCorrection operator_A(const FourierOperator &h, const AveragingFilter &filter, double t0) {
  const auto u = dyson_terms(h, t0, 1);
  const FourierOperator h_bar = h.lowpass(filter);
  const FourierOperator u1_bar = u[1].lowpass(filter);
  FourierOperator a = (h * u[1]).lowpass(filter) - h_bar * u1_bar;
  FourierOperator heff = h_bar + Complex(0.5) * (a + a.adjoint());
  return {std::move(a), std::move(heff)};
}

/// The part of L_2 in which rho is sandwiched between two operators:
///   avg(H rho U1^dag) - avg(H) rho avg(U1^dag) - avg(U1 rho H) + avg(U1) rho avg(H).
inline FourierSuperoperator decoherence_D2(const FourierOperator &h, const AveragingFilter &filter, double t0) {
  const auto u = dyson_terms(h, t0, 1);
  const FourierOperator h_bar = h.lowpass(filter);
  const FourierOperator u1_bar = u[1].lowpass(filter);
  const FourierOperator u1_dag = u[1].adjoint();
  return sandwich(h, u1_dag).lowpass(filter) - sandwich(h_bar, u1_bar.adjoint()) - sandwich(u[1], h).lowpass(filter) +
         sandwich(u1_bar, h_bar);
}

/// eta / min_n w_n, with eta the largest |eigenvalue| of H(t) sampled over
/// one beat period of the drive. Returns 0 when there are no drive terms.
inline double validity_ratio(const HarmonicHamiltonian &h, int samples = 4096) {
  if (h.terms().empty())
    return 0.0;
  double slowest = h.min_omega();
  for (const auto &a : h.terms())
    for (const auto &b : h.terms()) {
      const double beat = std::abs(a.omega - b.omega);
      if (beat > kFrequencyTolerance)
        slowest = std::min(slowest, beat);
    }
  const double span = 2.0 * std::numbers::pi / std::max(slowest, 1e-3 * h.min_omega());
  double eta = 0.0;
  for (int k = 0; k < samples; ++k)
    eta = std::max(eta, spectral_radius_hermitian(h(span * k / samples)));
  return eta / h.min_omega();
}

} // namespace timeavg
