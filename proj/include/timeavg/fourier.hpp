// Time-dependent matrices as finite sums  sum_k C_k t^{p_k} exp(i nu_k t).
//
// The same container holds operators (d x d) and superoperators
// (d^2 x d^2). Products, adjoints, derivatives and definite integrals are
// carried out term by term, so every quantity built from a trigonometric
// Hamiltonian stays exact in this representation.

#pragma once

#include "timeavg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace timeavg {

/// Frequencies closer than this are the same frequency; smaller ones are zero.
inline constexpr double kFrequencyTolerance = 1e-12;

/// Ideal low-pass averaging kernel: components with |nu| < cutoff pass
/// unchanged, all others are annihilated. Secular t^p factors ride along
/// with their exponential.
class AveragingFilter {
public:
  explicit AveragingFilter(double cutoff) : cutoff_(cutoff) {
    if (!(cutoff > 0.0))
      throw std::invalid_argument("AveragingFilter: cutoff must be positive");
  }

  /// A filter that passes every component.
  static AveragingFilter transparent() { return AveragingFilter(std::numeric_limits<double>::infinity()); }

  double cutoff() const { return cutoff_; }
  bool passes(double nu) const { return std::abs(nu) < cutoff_; }

private:
  double cutoff_;
};

template <class Matrix>
struct FourierTerm {
  Matrix coeff;
  double nu = 0.0;
  int power = 0;
};

template <class Matrix>
class FourierSeries {
public:
  using Term = FourierTerm<Matrix>;

  FourierSeries() = default;
  FourierSeries(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}

  static FourierSeries constant(Matrix m) {
    FourierSeries out(m.rows(), m.cols());
    out.add_term(std::move(m), 0.0, 0);
    return out;
  }

  static FourierSeries zero_like(const FourierSeries &other) { return FourierSeries(other.rows_, other.cols_); }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Term> &terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int max_power() const {
    int p = 0;
    for (const auto &t : terms_)
      p = std::max(p, t.power);
    return p;
  }

  /// Adds coeff * t^power * exp(i nu t), merging with an existing term of the
  /// same (nu, power). Terms stay sorted by (power, nu).
  void add_term(Matrix coeff, double nu, int power) {
    if (power < 0)
      throw std::invalid_argument("FourierSeries: negative power");
    if (rows_ == 0 && cols_ == 0) {
      rows_ = coeff.rows();
      cols_ = coeff.cols();
    }
    if (coeff.rows() != rows_ || coeff.cols() != cols_)
      throw DimensionError("FourierSeries: coefficient shape mismatch");
    if (std::abs(nu) <= kFrequencyTolerance)
      nu = 0.0;
    if (is_zero(coeff))
      return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), std::pair{power, nu - kFrequencyTolerance},
                               [](const Term &t, const std::pair<int, double> &key) {
                                 return t.power < key.first || (t.power == key.first && t.nu < key.second);
                               });
    if (it != terms_.end() && it->power == power && std::abs(it->nu - nu) <= kFrequencyTolerance) {
      it->coeff += coeff;
      if (is_zero(it->coeff))
        terms_.erase(it);
      return;
    }
    terms_.insert(it, Term{std::move(coeff), nu, power});
  }

  /// Value at time t.
  Matrix operator()(double t) const {
    Matrix out = Matrix::Zero(rows_, cols_);
    for (const auto &term : terms_) {
      Complex f = term.nu == 0.0 ? Complex(1.0) : std::exp(kI * (term.nu * t));
      if (term.power > 0)
        f *= std::pow(t, term.power);
      out += f * term.coeff;
    }
    return out;
  }

  FourierSeries derivative() const {
    FourierSeries out(rows_, cols_);
    for (const auto &term : terms_) {
      if (term.nu != 0.0)
        out.add_term(Complex(0.0, term.nu) * term.coeff, term.nu, term.power);
      if (term.power > 0)
        out.add_term(static_cast<double>(term.power) * term.coeff, term.nu, term.power - 1);
    }
    return out;
  }

  /// Pointwise adjoint for real t: conjugates the exponential.
  FourierSeries adjoint() const {
    FourierSeries out(cols_, rows_);
    for (const auto &term : terms_)
      out.add_term(term.coeff.adjoint(), -term.nu, term.power);
    return out;
  }

  /// G(t) = integral_{t0}^{t} F(s) ds, evaluated analytically.
  FourierSeries integrate_from(double t0) const {
    FourierSeries out(rows_, cols_);
    Matrix offset = Matrix::Zero(rows_, cols_);
    for (const auto &term : terms_) {
      const int p = term.power;
      if (term.nu == 0.0) {
        const double scale = 1.0 / (p + 1);
        out.add_term(scale * term.coeff, 0.0, p + 1);
        offset -= (scale * std::pow(t0, p + 1)) * term.coeff;
        continue;
      }
      // Antiderivative of s^p e^{i nu s}:
      //   e^{i nu s} sum_k (-1)^k p!/(p-k)! s^{p-k} / (i nu)^{k+1}.
      const Complex inu(0.0, term.nu);
      Complex c = 1.0 / inu;
      Complex at_t0 = 0.0;
      for (int k = 0; k <= p; ++k) {
        out.add_term(c * term.coeff, term.nu, p - k);
        at_t0 += c * std::pow(t0, p - k);
        c *= -static_cast<double>(p - k) / inu;
      }
      offset -= (at_t0 * std::exp(inu * t0)) * term.coeff;
    }
    out.add_term(std::move(offset), 0.0, 0);
    return out;
  }

  FourierSeries lowpass(const AveragingFilter &filter) const {
    FourierSeries out(rows_, cols_);
    for (const auto &term : terms_)
      if (filter.passes(term.nu))
        out.terms_.push_back(term);
    return out;
  }

  /// Drops terms whose largest coefficient magnitude is at most abs_tol.
  FourierSeries pruned(double abs_tol) const {
    FourierSeries out(rows_, cols_);
    for (const auto &term : terms_)
      if (term.coeff.cwiseAbs().maxCoeff() > abs_tol)
        out.terms_.push_back(term);
    return out;
  }

  FourierSeries &operator+=(const FourierSeries &rhs) {
    for (const auto &term : rhs.terms_)
      add_term(term.coeff, term.nu, term.power);
    if (rows_ == 0 && cols_ == 0) {
      rows_ = rhs.rows_;
      cols_ = rhs.cols_;
    }
    return *this;
  }

  FourierSeries &operator-=(const FourierSeries &rhs) {
    for (const auto &term : rhs.terms_)
      add_term(-term.coeff, term.nu, term.power);
    if (rows_ == 0 && cols_ == 0) {
      rows_ = rhs.rows_;
      cols_ = rhs.cols_;
    }
    return *this;
  }

  FourierSeries &operator*=(Complex s) {
    if (s == Complex(0.0)) {
      terms_.clear();
      return *this;
    }
    for (auto &term : terms_)
      term.coeff *= s;
    return *this;
  }

  friend FourierSeries operator+(FourierSeries a, const FourierSeries &b) { return a += b; }
  friend FourierSeries operator-(FourierSeries a, const FourierSeries &b) { return a -= b; }
  friend FourierSeries operator*(Complex s, FourierSeries a) { return a *= s; }
  friend FourierSeries operator*(FourierSeries a, Complex s) { return a *= s; }
  friend FourierSeries operator-(FourierSeries a) { return a *= Complex(-1.0); }

  /// Pointwise matrix product (composition, for superoperators).
  friend FourierSeries operator*(const FourierSeries &a, const FourierSeries &b) {
    if (a.cols_ != b.rows_)
      throw DimensionError("FourierSeries product: inner dimension mismatch");
    FourierSeries out(a.rows_, b.cols_);
    for (const auto &x : a.terms_)
      for (const auto &y : b.terms_)
        out.add_term(x.coeff * y.coeff, x.nu + y.nu, x.power + y.power);
    return out;
  }

  /// Pointwise product with a constant matrix on the right.
  friend FourierSeries operator*(const FourierSeries &a, const Matrix &m) {
    return a * FourierSeries::constant(m);
  }
  friend FourierSeries operator*(const Matrix &m, const FourierSeries &a) {
    return FourierSeries::constant(m) * a;
  }

private:
  static bool is_zero(const Matrix &m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (m(i, j) != Complex(0.0))
          return false;
    return true;
  }

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Term> terms_;
};

using FourierOperator = FourierSeries<Operator>;
using FourierSuperoperator = FourierSeries<Superoperator>;

inline FourierOperator lowpass_average(const FourierOperator &f, const AveragingFilter &filter) {
  return f.lowpass(filter);
}

/// Superoperator series of rho -> L(t) rho R(t).
inline FourierSuperoperator sandwich(const FourierOperator &left, const FourierOperator &right) {
  if (left.rows() != right.rows() || left.rows() != left.cols() || right.rows() != right.cols())
    throw DimensionError("sandwich: operand dimension mismatch");
  const Eigen::Index d = left.rows();
  FourierSuperoperator out(d * d, d * d);
  for (const auto &l : left.terms())
    for (const auto &r : right.terms())
      out.add_term(sandwich_superop(l.coeff, r.coeff), l.nu + r.nu, l.power + r.power);
  return out;
}

inline FourierSuperoperator left_multiplication(const FourierOperator &a) {
  return sandwich(a, FourierOperator::constant(Operator::Identity(a.rows(), a.cols())));
}

inline FourierSuperoperator right_multiplication(const FourierOperator &a) {
  return sandwich(FourierOperator::constant(Operator::Identity(a.rows(), a.cols())), a);
}

/// Diagnostic: rectangular-window average of F over [t - width/2, t + width/2]
/// by composite Simpson quadrature. Used to estimate the error of the ideal
/// filter idealization, never inside the series construction.
inline Operator windowed_average(const FourierOperator &f, double t, double width, int intervals = 2000) {
  if (!(width > 0.0))
    throw std::invalid_argument("windowed_average: width must be positive");
  if (intervals % 2 != 0)
    ++intervals;
  const double h = width / intervals;
  const double a = t - 0.5 * width;
  Operator acc = f(a) + f(a + width);
  for (int k = 1; k < intervals; ++k)
    acc += (k % 2 == 1 ? 4.0 : 2.0) * f(a + k * h);
  return acc * (h / 3.0) / width;
}

} // namespace timeavg
