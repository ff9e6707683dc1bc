// Three-level Raman system reduced to a four-component Bloch vector.
//
// In the Gell-Mann expansion of the averaged state the components
// (r_x, r_y, r_z, r_w) obey dr/dt = A(theta) r with theta = (w1 - w2) t, and
// the (1,3)/(2,3) coherences evolve on their own. In the frame rotated by
// M_theta the 4x4 system becomes
//
//   d' = Omega x d - r_w gamma_vec,   r_w' = -gamma_vec . d,
//
// Omega = (beta, 0, alpha + w1 - w2), gamma_vec = (0, gamma, 0), which
// oscillates at w = sqrt(|Omega|^2 - gamma^2).

#pragma once

#include "timeavg/gellmann.hpp"
#include "timeavg/harmonic.hpp"
#include "timeavg/hamiltonian.hpp"
#include "timeavg/propagate.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace timeavg {

class NonOscillatoryRegime : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

struct RamanParams {
  double rabi1 = 0.0;
  double rabi2 = 0.0;
  double omega1 = 1.0;
  double omega2 = 1.0;

  void validate() const {
    if (!(omega1 > 0.0) || !(omega2 > 0.0))
      throw ValidationError("RamanParams: detunings must be positive");
    if (!std::isfinite(rabi1) || !std::isfinite(rabi2))
      throw ValidationError("RamanParams: Rabi frequencies must be finite");
  }

  HarmonicHamiltonian hamiltonian() const { return raman_hamiltonian(rabi1, rabi2, omega1, omega2); }
};

struct RamanCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double theta_rate = 0.0;
};

inline RamanCoefficients raman_coefficients(const RamanParams &p) {
  p.validate();
  const double inv_plus = 0.5 * (1.0 / p.omega1 + 1.0 / p.omega2);
  const double inv_minus = 0.5 * (1.0 / p.omega1 - 1.0 / p.omega2);
  RamanCoefficients c;
  c.alpha = 0.25 * (p.rabi1 * p.rabi1 / p.omega1 - p.rabi2 * p.rabi2 / p.omega2);
  c.beta = 0.5 * p.rabi1 * p.rabi2 * inv_plus;
  c.gamma = std::sqrt(3.0) * 0.5 * p.rabi1 * p.rabi2 * inv_minus;
  c.theta_rate = p.omega1 - p.omega2;
  return c;
}

struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 0.0;
  /// (r_xa, r_ya, r_xb, r_yb), carried only when requested.
  std::optional<std::array<double, 4>> aux;

  Eigen::Vector4d main() const { return {x, y, z, w}; }

  static BlochState from(const Eigen::Vector4d &v) { return {v(0), v(1), v(2), v(3), std::nullopt}; }

  static BlochState from_coefficients(const BlochCoefficients &r, bool with_aux = true) {
    BlochState s{r[0], r[1], r[2], r[3], std::nullopt};
    if (with_aux)
      s.aux = std::array<double, 4>{r[4], r[5], r[6], r[7]};
    return s;
  }

  BlochCoefficients coefficients() const {
    const std::array<double, 4> a = aux.value_or(std::array<double, 4>{});
    return {x, y, z, w, a[0], a[1], a[2], a[3]};
  }
};

/// A(theta) acting on (r_x, r_y, r_z, r_w).
inline Eigen::Matrix4d raman_matrix(const RamanCoefficients &c, double theta) {
  const double s = std::sin(theta);
  const double co = std::cos(theta);
  Eigen::Matrix4d a;
  // clang-format off
  a <<  0.0,           -c.alpha,     -c.beta * s,  -c.gamma * s,
        c.alpha,        0.0,         -c.beta * co, -c.gamma * co,
        c.beta * s,     c.beta * co,  0.0,          0.0,
       -c.gamma * s,   -c.gamma * co, 0.0,          0.0;
  // clang-format on
  return a;
}

/// Raman effective dynamics in Bloch form. Holds the harmonic generator so
/// the decoupled (1,3)/(2,3) block can be evolved alongside when present.
class RamanModel {
public:
  explicit RamanModel(const RamanParams &p)
      : params_(p), coef_(raman_coefficients(p)), generator_(p.hamiltonian()) {}

  const RamanParams &params() const { return params_; }
  const RamanCoefficients &coefficients() const { return coef_; }
  const EffectiveGenerator &generator() const { return generator_; }

  double theta(double t) const { return coef_.theta_rate * t; }
  Eigen::Matrix4d matrix(double t) const { return raman_matrix(coef_, theta(t)); }

  /// Linear map on (r_xa, r_ya, r_xb, r_yb), projected from the master equation.
  Eigen::Matrix4d coherence_block(double t) const {
    const auto &g = gellmann_basis();
    const std::array<const Operator *, 4> elems{&g.Xa, &g.Ya, &g.Xb, &g.Yb};
    Eigen::Matrix4d block;
    for (int k = 0; k < 4; ++k) {
      const Operator d = generator_.master_rhs(*elems[static_cast<std::size_t>(k)], t);
      for (int l = 0; l < 4; ++l)
        block(l, k) = 0.5 * (*elems[static_cast<std::size_t>(l)] * d).trace().real();
    }
    return block;
  }

  BlochState rhs(const BlochState &r, double t) const {
    BlochState out = BlochState::from(matrix(t) * r.main());
    if (r.aux) {
      const Eigen::Vector4d v(r.aux->data());
      const Eigen::Vector4d dv = coherence_block(t) * v;
      out.aux = std::array<double, 4>{dv(0), dv(1), dv(2), dv(3)};
    }
    return out;
  }

private:
  RamanParams params_;
  RamanCoefficients coef_;
  EffectiveGenerator generator_;
};

inline BlochState bloch_rhs(const RamanParams &p, const BlochState &r, double t) {
  if (!r.aux)
    return BlochState::from(raman_matrix(raman_coefficients(p), (p.omega1 - p.omega2) * t) * r.main());
  return RamanModel(p).rhs(r, t);
}

/// M_theta: rotates (r_x, r_y) by theta, leaves r_z, r_w and the coherence block alone.
inline BlochState corotate(const BlochState &r, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  BlochState out = r;
  out.x = c * r.x - s * r.y;
  out.y = s * r.x + c * r.y;
  return out;
}

/// Closed-form solution in the co-rotating frame,
///
///   d(t)   = e_O d_O + e_g R cos(w t + phi) + e_p (R (O/w) sin(w t + phi) - (g/O) r_w0)
///   r_w(t) = -R (g/w) sin(w t + phi) + r_w0
///
/// with O = |Omega|, g = gamma (signed, e_g = y axis) and e_p = e_O x e_g.
/// phi = 0 is the gauge in which the phase is absorbed into the time origin.
struct RotatingSolution {
  Eigen::Vector3d torque;
  double torque_norm = 0.0;
  double gamma = 0.0;
  double omega = 0.0;
  Eigen::Vector3d e_omega, e_gamma, e_p;
  double d_omega = 0.0;
  double amplitude = 0.0; // R
  double r_w0 = 0.0;
  double phase = 0.0;

  double d_gamma(double t) const { return amplitude * std::cos(omega * t + phase); }

  double d_p(double t) const {
    return amplitude * (torque_norm / omega) * std::sin(omega * t + phase) - (gamma / torque_norm) * r_w0;
  }

  double r_w(double t) const { return -amplitude * (gamma / omega) * std::sin(omega * t + phase) + r_w0; }

  Eigen::Vector3d d(double t) const { return e_omega * d_omega + e_gamma * d_gamma(t) + e_p * d_p(t); }

  /// Rotating-frame Bloch vector at t.
  BlochState at(double t) const {
    const Eigen::Vector3d v = d(t);
    return {v(0), v(1), v(2), r_w(t), std::nullopt};
  }

  /// l^2 = d_O^2 + d_g^2 + d_p^2.
  double length_squared(double t) const {
    const double g = d_gamma(t);
    const double p = d_p(t);
    return d_omega * d_omega + g * g + p * p;
  }
};

/// Fits the solution constants to `init`, the state at t = 0 (where the
/// rotating and laboratory frames coincide).
inline RotatingSolution raman_analytic(const RamanParams &p, const BlochState &init) {
  const RamanCoefficients c = raman_coefficients(p);
  RotatingSolution sol;
  sol.torque = Eigen::Vector3d(c.beta, 0.0, c.alpha + c.theta_rate);
  sol.torque_norm = sol.torque.norm();
  sol.gamma = c.gamma;
  const double w2 = sol.torque_norm * sol.torque_norm - c.gamma * c.gamma;
  if (!(sol.torque_norm > 0.0) || !(w2 > 0.0))
    throw NonOscillatoryRegime("Raman dynamics not oscillatory: |Omega|^2 - gamma^2 = " + std::to_string(w2));
  sol.omega = std::sqrt(w2);
  sol.e_omega = sol.torque / sol.torque_norm;
  sol.e_gamma = Eigen::Vector3d::UnitY();
  sol.e_p = sol.e_omega.cross(sol.e_gamma);

  const Eigen::Vector3d d0(init.x, init.y, init.z);
  sol.d_omega = sol.e_omega.dot(d0);
  const double dg0 = sol.e_gamma.dot(d0);
  const double dp0 = sol.e_p.dot(d0);
  const double s = (sol.torque_norm * dp0 + c.gamma * init.w) / sol.omega;
  sol.amplitude = std::hypot(dg0, s);
  sol.phase = std::atan2(s, dg0);
  sol.r_w0 = init.w + (c.gamma / sol.omega) * s;
  return sol;
}

inline BlochState raman_analytic(const RamanParams &p, const BlochState &init, double t) {
  return raman_analytic(p, init).at(t);
}

/// d(l^2)/dt = (g^2/w) R^2 sin 2(wt + phi) - 2 g R r_w0 cos(wt + phi).
inline double purity_rate(const RotatingSolution &sol, double t) {
  const double arg = sol.omega * t + sol.phase;
  return (sol.gamma * sol.gamma / sol.omega) * sol.amplitude * sol.amplitude * std::sin(2.0 * arg) -
         2.0 * sol.gamma * sol.amplitude * sol.r_w0 * std::cos(arg);
}

/// RK4 integration of the (lab-frame) Bloch system on `grid`; the observer
/// sees every grid point including t0.
inline void integrate_bloch(const RamanModel &model, const BlochState &init, const TimeGrid &grid,
                            const std::function<void(double, const BlochState &)> &observer) {
  auto axpy = [](const BlochState &a, double h, const BlochState &b) {
    BlochState out{a.x + h * b.x, a.y + h * b.y, a.z + h * b.z, a.w + h * b.w, a.aux};
    if (a.aux && b.aux)
      for (std::size_t i = 0; i < 4; ++i)
        (*out.aux)[i] += h * (*b.aux)[i];
    return out;
  };
  BlochState r = init;
  const double dt = grid.dt();
  observer(grid.t0(), r);
  for (std::int64_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const BlochState k1 = model.rhs(r, t);
    const BlochState k2 = model.rhs(axpy(r, 0.5 * dt, k1), t + 0.5 * dt);
    const BlochState k3 = model.rhs(axpy(r, 0.5 * dt, k2), t + 0.5 * dt);
    const BlochState k4 = model.rhs(axpy(r, dt, k3), t + dt);
    r = axpy(r, dt / 6.0, k1);
    r = axpy(r, dt / 3.0, k2);
    r = axpy(r, dt / 3.0, k3);
    r = axpy(r, dt / 6.0, k4);
    observer(grid.time(k + 1), r);
  }
}

} // namespace timeavg
