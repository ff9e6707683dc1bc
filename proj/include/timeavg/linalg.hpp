// Dense operator and superoperator algebra on small Hilbert spaces.
//
// Operators are plain Eigen complex matrices. Superoperators act on
// column-stacked operators: vec(A) concatenates the columns of A, so that
// vec(L * rho * R) == kron(R^T, L) * vec(rho).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace timeavg {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Superoperator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require_square(const Operator &a, const char *what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimensionError(std::string(what) + ": operator must be square and non-empty");
}

inline void require_same_dim(const Operator &a, const Operator &b, const char *what) {
  require_square(a, what);
  require_square(b, what);
  if (a.rows() != b.rows())
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
}

} // namespace detail

inline Operator commutator(const Operator &a, const Operator &b) {
  detail::require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

inline Operator anticommutator(const Operator &a, const Operator &b) {
  detail::require_same_dim(a, b, "anticommutator");
  return a * b + b * a;
}

/// |i><j| in dimension `dim`, zero-based indices.
inline Operator ket_bra(Eigen::Index dim, Eigen::Index i, Eigen::Index j) {
  Operator m = Operator::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

/// Largest entrywise |A - A^dagger|.
inline double hermiticity_violation(const Operator &a) {
  if (a.size() == 0)
    return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_finite(const Operator &a) {
  return a.allFinite();
}

inline Operator hermitian_part(const Operator &a) {
  return 0.5 * (a + a.adjoint());
}

/// Eigenvalues of the Hermitian part, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const Operator &a) {
  Eigen::SelfAdjointEigenSolver<Operator> solver(hermitian_part(a), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double spectral_radius_hermitian(const Operator &a) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(a);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// --------------------------------------------------------------------------
// Vectorization
// --------------------------------------------------------------------------

inline Vector vectorize(const Operator &a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Operator unvectorize(const Vector &v) {
  const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (dim * dim != v.size() || dim == 0)
    throw DimensionError("unvectorize: length " + std::to_string(v.size()) + " is not a square");
  return Eigen::Map<const Operator>(v.data(), dim, dim);
}

inline Eigen::Index superop_dim(const Superoperator &s) {
  const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(s.rows()))));
  if (s.rows() != s.cols() || dim * dim != s.rows())
    throw DimensionError("superoperator is not dim^2 x dim^2");
  return dim;
}

inline Superoperator kron(const Operator &a, const Operator &b) {
  Superoperator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Matrix of rho -> L rho R in the column-stacking convention.
inline Superoperator sandwich_superop(const Operator &left, const Operator &right) {
  detail::require_same_dim(left, right, "sandwich_superop");
  return kron(right.transpose(), left);
}

inline Superoperator identity_superop(Eigen::Index dim) {
  return Superoperator::Identity(dim * dim, dim * dim);
}

inline Operator apply(const Superoperator &s, const Operator &rho) {
  if (s.cols() != rho.size())
    throw DimensionError("apply: superoperator does not act on this operator space");
  return unvectorize(s * vectorize(rho));
}

// --------------------------------------------------------------------------
// Density matrices
// --------------------------------------------------------------------------

struct DensityTolerances {
  double hermiticity = 1e-12;
  double trace = 1e-12;
  double positivity = 1e-9;
};

struct DensityReport {
  bool square = true;
  bool finite = true;
  bool hermitian = true;
  bool unit_trace = true;
  bool positive = true;
  double hermiticity_violation = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;

  bool ok() const { return square && finite && hermitian && unit_trace && positive; }

  /// Human-readable list of the failed properties, empty when ok().
  std::string failures() const {
    std::string out;
    auto add = [&out](const std::string &s) {
      if (!out.empty())
        out += "; ";
      out += s;
    };
    if (!square)
      add("not square");
    if (!finite)
      add("non-finite entries");
    if (!hermitian)
      add("hermiticity violated (max |M - M^dagger| = " + std::to_string(hermiticity_violation) + ")");
    if (!unit_trace)
      add("trace differs from 1 by " + std::to_string(trace_error));
    if (!positive)
      add("positivity violated (min eigenvalue " + std::to_string(min_eigenvalue) + ")");
    return out;
  }
};

inline DensityReport validate_density(const Operator &m, const DensityTolerances &tol = {}) {
  DensityReport r;
  if (m.rows() != m.cols() || m.rows() == 0) {
    r.square = false;
    r.hermitian = r.unit_trace = r.positive = false;
    return r;
  }
  if (!m.allFinite()) {
    r.finite = false;
    r.hermitian = r.unit_trace = r.positive = false;
    return r;
  }
  r.hermiticity_violation = hermiticity_violation(m);
  r.hermitian = r.hermiticity_violation <= tol.hermiticity;
  r.trace_error = std::abs(m.trace() - Complex(1.0));
  r.unit_trace = r.trace_error <= tol.trace;
  r.min_eigenvalue = hermitian_eigenvalues(m)(0);
  r.positive = r.min_eigenvalue >= -tol.positivity;
  return r;
}

/// A validated density matrix. Immutable after construction.
class DensityMatrix {
public:
  explicit DensityMatrix(Operator m, const DensityTolerances &tol = {}) : op_(std::move(m)) {
    const DensityReport r = validate_density(op_, tol);
    if (!r.ok())
      throw ValidationError("invalid density matrix: " + r.failures());
  }

  static DensityMatrix pure(const Vector &psi) {
    const double n = psi.norm();
    if (n == 0.0)
      throw ValidationError("pure state vector has zero norm");
    const Vector v = psi / n;
    return DensityMatrix(v * v.adjoint());
  }

  static DensityMatrix maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(Operator::Identity(dim, dim) / static_cast<double>(dim));
  }

  const Operator &op() const { return op_; }
  Eigen::Index dim() const { return op_.rows(); }
  double purity() const { return (op_ * op_).trace().real(); }

private:
  Operator op_;
};

} // namespace timeavg
