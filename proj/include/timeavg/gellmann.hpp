// SU(3) Gell-Mann basis and the generalized Bloch vector of a qutrit.
//
// Level labels |1>, |2>, |3> map to indices 0, 1, 2. The identity
// coefficient is fixed at 1/3 so that the composed operator has unit trace;
// every other coefficient is r_k = tr(rho G_k) / tr(G_k^2) = tr(rho G_k) / 2.

#pragma once

#include "timeavg/linalg.hpp"

#include <array>
#include <cmath>
#include <cstddef>

namespace timeavg {

struct GellMannBasis {
  Operator I, X, Y, Z, W, Xa, Ya, Xb, Yb;

  /// The eight traceless elements in Bloch order (x, y, z, w, xa, ya, xb, yb).
  std::array<const Operator *, 8> traceless() const {
    return {&X, &Y, &Z, &W, &Xa, &Ya, &Xb, &Yb};
  }
};

/// Coefficients (r_x, r_y, r_z, r_w, r_xa, r_ya, r_xb, r_yb).
using BlochCoefficients = std::array<double, 8>;

inline GellMannBasis make_gellmann_basis() {
  auto kb = [](int i, int j) { return ket_bra(3, i, j); };
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  GellMannBasis g;
  g.I = Operator::Identity(3, 3);
  g.X = kb(0, 1) + kb(1, 0);
  g.Y = -kI * (kb(0, 1) - kb(1, 0));
  g.Z = kb(0, 0) - kb(1, 1);
  g.W = inv_sqrt3 * (kb(0, 0) + kb(1, 1) - 2.0 * kb(2, 2));
  g.Xa = kb(0, 2) + kb(2, 0);
  g.Ya = -kI * (kb(0, 2) - kb(2, 0));
  g.Xb = kb(1, 2) + kb(2, 1);
  g.Yb = -kI * (kb(1, 2) - kb(2, 1));
  return g;
}

inline const GellMannBasis &gellmann_basis() {
  static const GellMannBasis basis = make_gellmann_basis();
  return basis;
}

inline BlochCoefficients bloch_decompose(const Operator &rho) {
  if (rho.rows() != 3 || rho.cols() != 3)
    throw DimensionError("bloch_decompose: expected a 3x3 operator");
  const auto elems = gellmann_basis().traceless();
  BlochCoefficients r{};
  for (std::size_t k = 0; k < elems.size(); ++k)
    r[k] = 0.5 * (rho * *elems[k]).trace().real();
  return r;
}

inline Operator bloch_compose(const BlochCoefficients &r) {
  const auto &g = gellmann_basis();
  const auto elems = g.traceless();
  Operator rho = g.I / 3.0;
  for (std::size_t k = 0; k < elems.size(); ++k)
    rho += r[k] * *elems[k];
  return rho;
}

} // namespace timeavg
