// Fixed-step classical Runge-Kutta propagation of density matrices.

#pragma once

#include "timeavg/fourier.hpp"
#include "timeavg/harmonic.hpp"
#include "timeavg/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace timeavg {

class PropagationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid t_k = t0 + k dt, k = 0..steps(). The step count is
/// (t_max - t0)/dt rounded to the nearest integer.
class TimeGrid {
public:
  static constexpr double kMaxSteps = 1e7;

  TimeGrid(double t0, double t_max, double dt) : t0_(t0), t_max_(t_max), dt_(dt) {
    if (!std::isfinite(t0) || !std::isfinite(t_max) || !(t_max > t0))
      throw ValidationError("TimeGrid: need finite t_max > t0");
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw ValidationError("TimeGrid: dt must be positive");
    const double n = (t_max - t0) / dt;
    if (n > kMaxSteps)
      throw ValidationError("TimeGrid: more than 1e7 steps");
    steps_ = std::max<std::int64_t>(1, std::llround(n));
  }

  double t0() const { return t0_; }
  double t_max() const { return t_max_; }
  double dt() const { return dt_; }
  std::int64_t steps() const { return steps_; }
  std::size_t points() const { return static_cast<std::size_t>(steps_) + 1; }
  double time(std::int64_t k) const { return t0_ + static_cast<double>(k) * dt_; }

private:
  double t0_, t_max_, dt_;
  std::int64_t steps_ = 0;
};

struct StepMonitor {
  double time = 0.0;
  double min_eigenvalue = 0.0;
  double purity = 0.0;
};

struct PropagationStats {
  std::size_t trace_renormalizations = 0;
  std::size_t positivity_warnings = 0;
  double first_positivity_warning_time = std::numeric_limits<double>::quiet_NaN();
  double min_eigenvalue = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Operator> states;
  std::vector<double> min_eigenvalues;
  PropagationStats stats;
};

/// Called once per grid point (including t0) with the state and its monitor.
using StateObserver = std::function<void(const Operator &, const StepMonitor &)>;
using DensityRhs = std::function<Operator(const Operator &, double)>;

struct PropagationOptions {
  double trace_drift_tolerance = 1e-12;
  double positivity_tolerance = 1e-9;
};

/// Integrates d(rho)/dt = rhs(rho, t) with classical RK4 on `grid`.
inline PropagationStats propagate(const DensityRhs &rhs, const DensityMatrix &rho0, const TimeGrid &grid,
                                  const StateObserver &observer, const PropagationOptions &opts = {}) {
  PropagationStats stats;
  Operator rho = rho0.op();
  const double dt = grid.dt();

  auto observe = [&](double t) {
    const double min_eig = hermitian_eigenvalues(rho)(0);
    stats.min_eigenvalue = std::min(stats.min_eigenvalue, min_eig);
    if (min_eig < -opts.positivity_tolerance) {
      if (stats.positivity_warnings == 0)
        stats.first_positivity_warning_time = t;
      ++stats.positivity_warnings;
    }
    if (observer)
      observer(rho, StepMonitor{t, min_eig, (rho * rho).trace().real()});
  };

  observe(grid.t0());
  for (std::int64_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const Operator k1 = rhs(rho, t);
    const Operator k2 = rhs(rho + (0.5 * dt) * k1, t + 0.5 * dt);
    const Operator k3 = rhs(rho + (0.5 * dt) * k2, t + 0.5 * dt);
    const Operator k4 = rhs(rho + dt * k3, t + dt);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!rho.allFinite())
      throw PropagationError("propagation diverged at t = " + std::to_string(grid.time(k + 1)));
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0)) > opts.trace_drift_tolerance) {
      rho /= tr;
      ++stats.trace_renormalizations;
    }
    observe(grid.time(k + 1));
  }
  return stats;
}

namespace detail {

inline Trajectory collect(const DensityRhs &rhs, const DensityMatrix &rho0, const TimeGrid &grid,
                          const PropagationOptions &opts) {
  Trajectory traj;
  traj.times.reserve(grid.points());
  traj.states.reserve(grid.points());
  traj.min_eigenvalues.reserve(grid.points());
  traj.stats = propagate(
      rhs, rho0, grid,
      [&](const Operator &rho, const StepMonitor &m) {
        traj.times.push_back(m.time);
        traj.states.push_back(rho);
        traj.min_eigenvalues.push_back(m.min_eigenvalue);
      },
      opts);
  return traj;
}

} // namespace detail

/// von Neumann right-hand side -i[H(t), rho]; H is checked for Hermiticity
/// at every evaluation point.
inline DensityRhs von_neumann_rhs(const FourierOperator &h, double hermiticity_tolerance = 1e-10) {
  return [h, hermiticity_tolerance](const Operator &rho, double t) -> Operator {
    const Operator ht = h(t);
    if (hermiticity_violation(ht) > hermiticity_tolerance)
      throw PropagationError("Hamiltonian is not Hermitian at t = " + std::to_string(t));
    return -kI * (ht * rho - rho * ht);
  };
}

inline DensityRhs effective_rhs(const EffectiveGenerator &gen) {
  return [&gen](const Operator &rho, double t) -> Operator { return gen.master_rhs(rho, t); };
}

inline void check_dims(Eigen::Index h_dim, const DensityMatrix &rho0) {
  if (h_dim != rho0.dim())
    throw DimensionError("initial state dimension " + std::to_string(rho0.dim()) + " does not match Hamiltonian " +
                         std::to_string(h_dim));
}

inline Trajectory propagate_exact(const FourierOperator &h, const DensityMatrix &rho0, const TimeGrid &grid,
                                  const PropagationOptions &opts = {}) {
  check_dims(h.rows(), rho0);
  return detail::collect(von_neumann_rhs(h), rho0, grid, opts);
}

inline Trajectory propagate_effective(const EffectiveGenerator &gen, const DensityMatrix &rho0, const TimeGrid &grid,
                                      const PropagationOptions &opts = {}) {
  check_dims(gen.dim(), rho0);
  return detail::collect(effective_rhs(gen), rho0, grid, opts);
}

/// Default step: 0.05 divided by the fastest frequency in the problem
/// (drive frequencies and the spread of H0).
inline double default_step(const HarmonicHamiltonian &h) {
  double fastest = h.max_omega();
  const Eigen::VectorXd ev = hermitian_eigenvalues(h.h0());
  fastest = std::max(fastest, ev(ev.size() - 1) - ev(0));
  for (const auto &term : h.terms())
    fastest = std::max(fastest, 2.0 * term.h.norm());
  return fastest > 0.0 ? 0.05 / fastest : 0.05;
}

} // namespace timeavg
