#pragma once

// Trigonometric polynomials with nonnegative frequencies and the Fejer kernel.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "superres/error.hpp"
#include "superres/vandermonde.hpp"

namespace superres {

/// f(w) = sum_{m=0}^{n-1} c_m e^{2 pi i m w}.
class TrigPoly {
 public:
  TrigPoly() : c_(CVector::Zero(1)) {}
  explicit TrigPoly(CVector coeffs) : c_(std::move(coeffs)) {
    if (c_.size() == 0) c_ = CVector::Zero(1);
  }

  static TrigPoly constant(Complex v) {
    CVector c(1);
    c(0) = v;
    return TrigPoly(std::move(c));
  }

  const CVector& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  /// Largest index whose coefficient exceeds tol in magnitude.
  int effective_degree(double tol = 0.0) const {
    for (Eigen::Index m = c_.size() - 1; m > 0; --m)
      if (std::abs(c_(m)) > tol) return static_cast<int>(m);
    return 0;
  }

  Complex operator()(double w) const {
    const Complex z = unit_phasor(w);
    Complex acc = c_(c_.size() - 1);
    for (Eigen::Index m = c_.size() - 2; m >= 0; --m) acc = acc * z + c_(m);
    return acc;
  }

  /// L2(T) norm, by Parseval.
  double l2_norm() const { return c_.norm(); }

  /// g(w) = f(w - t).
  TrigPoly translated(double t) const {
    CVector out(c_.size());
    for (Eigen::Index m = 0; m < c_.size(); ++m) out(m) = c_(m) * unit_phasor(-static_cast<double>(m) * t);
    return TrigPoly(std::move(out));
  }

  /// f(w) (a + b e^{2 pi i q w}).
  TrigPoly times_binomial(Complex a, Complex b, int q) const {
    if (q < 0) throw Error(ErrorCode::invalid_argument, "binomial factor frequency must be nonnegative");
    CVector out = CVector::Zero(c_.size() + q);
    out.head(c_.size()) += a * c_;
    out.segment(q, c_.size()) += b * c_;
    return TrigPoly(std::move(out));
  }

  TrigPoly pow(int k) const {
    if (k < 0) throw Error(ErrorCode::invalid_argument, "negative power");
    TrigPoly result = constant(1.0);
    TrigPoly base = *this;
    while (k > 0) {
      if (k & 1) result = result * base;
      k >>= 1;
      if (k > 0) base = base * base;
    }
    return result;
  }

  friend TrigPoly operator*(const TrigPoly& f, const TrigPoly& g) {
    const Eigen::Index n = f.c_.size();
    const Eigen::Index m = g.c_.size();
    CVector out = CVector::Zero(n + m - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (f.c_(i) == Complex(0.0)) continue;
      out.segment(i, m) += f.c_(i) * g.c_;
    }
    return TrigPoly(std::move(out));
  }

  friend TrigPoly operator*(Complex s, const TrigPoly& f) { return TrigPoly(s * f.c_); }

  friend TrigPoly operator+(const TrigPoly& f, const TrigPoly& g) {
    CVector out = CVector::Zero(std::max(f.c_.size(), g.c_.size()));
    out.head(f.c_.size()) += f.c_;
    out.head(g.c_.size()) += g.c_;
    return TrigPoly(std::move(out));
  }

 private:
  CVector c_;
};

/// e^{2 pi i P w} F_P(w): triangular weights on frequencies 0..2P.
inline TrigPoly fejer(int P) {
  if (P < 1) throw Error(ErrorCode::invalid_argument, "Fejer order must be >= 1");
  CVector c(2 * P + 1);
  const double p1 = P + 1.0;
  for (int n = 0; n <= 2 * P; ++n) c(n) = (1.0 - std::abs(n - P) / p1) / p1;
  return TrigPoly(std::move(c));
}

/// F_P(w) in closed form, (sin(pi (P+1) w) / ((P+1) sin(pi w)))^2.
inline double fejer_kernel_value(int P, double w) {
  const double p1 = P + 1.0;
  const double t = w - std::round(w);
  const double s = std::sin(std::numbers::pi * t);
  if (std::fabs(s) < 1e-300) return 1.0;
  const double r = std::sin(std::numbers::pi * p1 * t) / (p1 * s);
  return r * r;
}

/// Pointwise evaluation by summing phasors term by term.
inline CVector eval_poly(const TrigPoly& f, const std::vector<double>& points) {
  CVector out(static_cast<Eigen::Index>(points.size()));
  const CVector& c = f.coeffs();
  for (std::size_t i = 0; i < points.size(); ++i) {
    Complex acc = 0.0;
    for (Eigen::Index m = 0; m < c.size(); ++m) acc += c(m) * unit_phasor(static_cast<double>(m) * points[i]);
    out(static_cast<Eigen::Index>(i)) = acc;
  }
  return out;
}

/// Values at g/G for g = 0..G-1 by one inverse FFT of the folded coefficients.
inline CVector eval_uniform(const CVector& coeffs, int G) {
  if (G < 1) throw Error(ErrorCode::invalid_argument, "grid size must be positive");
  std::vector<Complex> folded(static_cast<std::size_t>(G), Complex(0.0));
  for (Eigen::Index m = 0; m < coeffs.size(); ++m) folded[static_cast<std::size_t>(m % G)] += coeffs(m);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> values;
  fft.inv(values, folded);
  return Eigen::Map<CVector>(values.data(), G);
}

inline CVector eval_uniform(const TrigPoly& f, int G) { return eval_uniform(f.coeffs(), G); }

inline std::vector<double> uniform_grid(int G) {
  std::vector<double> g(static_cast<std::size_t>(G));
  for (int i = 0; i < G; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / G;
  return g;
}

}  // namespace superres
