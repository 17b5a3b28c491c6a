#pragma once

// Steering vectors, Vandermonde and Hankel matrices, noisy measurement
// synthesis and the SVD-based subspace split used by MUSIC.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "superres/error.hpp"
#include "superres/torus.hpp"

namespace superres {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Singular values below this fraction of sigma_max are treated as round-off.
inline constexpr double kNumericalFloor = 1e-13;

/// e^{2 pi i t}, with t reduced mod 1 before the trig call.
inline Complex unit_phasor(double turns) {
  const double t = turns - std::floor(turns);
  const double angle = 2.0 * std::numbers::pi * t;
  return {std::cos(angle), std::sin(angle)};
}

/// phi_L(w) = (1, e^{-2 pi i w}, ..., e^{-2 pi i L w}).
inline CVector steering_vector(TorusPoint w, int L) {
  if (L < 0) throw Error(ErrorCode::invalid_argument, "steering vector order must be nonnegative");
  CVector v(L + 1);
  for (int m = 0; m <= L; ++m) v(m) = unit_phasor(-static_cast<double>(m) * w.value());
  return v;
}

/// (M+1) x S matrix whose columns are steering vectors of the nodes.
inline CMatrix vandermonde(const SupportSet& omega, int M) {
  if (M < 0) throw Error(ErrorCode::invalid_argument, "M must be nonnegative");
  CMatrix phi(M + 1, static_cast<Eigen::Index>(omega.size()));
  for (std::size_t j = 0; j < omega.size(); ++j) phi.col(static_cast<Eigen::Index>(j)) = steering_vector(omega.point(j), M);
  return phi;
}

struct SigmaExtremes {
  double min = 0.0;
  double max = 0.0;
  bool below_numerical_floor = false;
};

inline SigmaExtremes sigma_extremes(const CMatrix& a) {
  if (a.size() == 0) throw Error(ErrorCode::invalid_argument, "sigma_extremes of an empty matrix");
  Eigen::JacobiSVD<CMatrix, Eigen::ColPivHouseholderQRPreconditioner> svd(a);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!sv.allFinite() || sv.size() == 0) {
    throw Error(ErrorCode::numeric_failure,
                "SVD failed for " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " matrix");
  }
  SigmaExtremes out{sv(sv.size() - 1), sv(0), false};
  out.below_numerical_floor = out.min < kNumericalFloor * out.max;
  return out;
}

inline double spectral_norm(const CMatrix& a) { return sigma_extremes(a).max; }

/// Point sources: support plus nonzero complex amplitudes.
class SpikeSignal {
 public:
  SpikeSignal(SupportSet support, CVector amplitudes) : support_(std::move(support)), x_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(x_.size()) != support_.size())
      throw Error(ErrorCode::cardinality_mismatch, "one amplitude per node required");
    for (Eigen::Index j = 0; j < x_.size(); ++j)
      if (!(std::abs(x_(j)) > 0.0)) throw Error(ErrorCode::invalid_argument, "amplitudes must be nonzero");
  }

  const SupportSet& support() const { return support_; }
  const CVector& amplitudes() const { return x_; }
  std::size_t size() const { return support_.size(); }
  double x_min() const { return x_.cwiseAbs().minCoeff(); }
  double x_max() const { return x_.cwiseAbs().maxCoeff(); }

 private:
  SupportSet support_;
  CVector x_;
};

struct Measurements {
  CVector y;
  int M = 0;
  std::optional<CVector> noise;
  std::optional<std::uint64_t> seed;
};

/// Circularly-symmetric complex Gaussian vector, per-entry standard deviation sigma.
inline CVector complex_gaussian(Eigen::Index n, double sigma, std::mt19937_64& rng) {
  CVector eta = CVector::Zero(n);
  if (sigma == 0.0) return eta;
  std::normal_distribution<double> normal(0.0, sigma / std::numbers::sqrt2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    eta(k) = Complex(re, im);
  }
  return eta;
}

/// y_k = sum_j x_j e^{-2 pi i k w_j} + eta_k, k = 0..M.
inline Measurements synthesize(const SpikeSignal& signal, int M, double sigma, std::uint64_t seed) {
  if (M < 1) throw Error(ErrorCode::invalid_argument, "M must be positive");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise level must be nonnegative");
  Measurements out;
  out.M = M;
  out.seed = seed;
  out.y = vandermonde(signal.support(), M) * signal.amplitudes();
  std::mt19937_64 rng(seed);
  CVector eta = complex_gaussian(M + 1, sigma, rng);
  out.y += eta;
  out.noise = std::move(eta);
  return out;
}

/// (L+1) x (M-L+1) Hankel matrix with entry (i, j) = y_{i+j}.
inline CMatrix hankel(const CVector& y, int L) {
  const int M = static_cast<int>(y.size()) - 1;
  if (L < 1 || L > M)
    throw Error(ErrorCode::bad_pencil_parameter, "need 1 <= L <= M, got L=" + std::to_string(L) + " M=" + std::to_string(M));
  CMatrix h(L + 1, M - L + 1);
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= M - L; ++j) h(i, j) = y(i + j);
  return h;
}

inline CMatrix hankel(const Measurements& meas, int L) { return hankel(meas.y, L); }

struct SvdResult {
  Eigen::VectorXd singular_values;  // descending
  CMatrix signal_left;              // U: first S left singular vectors
  CMatrix noise_left;               // W: orthonormal complement of U
  CMatrix signal_right;
  CMatrix noise_right;
};

/// Full left singular basis and singular values. Eigen 3.4's divide-and-conquer
/// SVD can return non-finite vectors on exactly rank-deficient input; those cases
/// are redone with the one-sided Jacobi SVD.
struct LeftSvd {
  Eigen::VectorXd singular_values;  // descending
  CMatrix U;
  CMatrix V;  // empty unless requested
};

inline LeftSvd left_svd(const CMatrix& h, bool with_v = false) {
  const unsigned opts = Eigen::ComputeFullU | (with_v ? Eigen::ComputeFullV : 0u);
  Eigen::BDCSVD<CMatrix> svd(h, opts);
  if (svd.singularValues().allFinite() && svd.matrixU().allFinite() && (!with_v || svd.matrixV().allFinite()))
    return {svd.singularValues(), svd.matrixU(), with_v ? CMatrix(svd.matrixV()) : CMatrix()};
  Eigen::JacobiSVD<CMatrix> jac(h, opts);
  if (!jac.singularValues().allFinite() || !jac.matrixU().allFinite())
    throw Error(ErrorCode::numeric_failure, "SVD failed for " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) + " matrix");
  return {jac.singularValues(), jac.matrixU(), with_v ? CMatrix(jac.matrixV()) : CMatrix()};
}

/// Splits the left space of H into the rank-S signal part and its complement.
inline SvdResult noise_space(const CMatrix& h, int S) {
  const Eigen::Index rows = h.rows();
  const Eigen::Index cols = h.cols();
  if (S < 1 || S >= std::min(rows, cols)) {
    throw Error(ErrorCode::bad_pencil_parameter, "need 1 <= S < min(rows, cols) = " + std::to_string(std::min(rows, cols)) +
                                                     ", got S=" + std::to_string(S));
  }
  const LeftSvd svd = left_svd(h, true);
  SvdResult out;
  out.singular_values = svd.singular_values;
  out.signal_left = svd.U.leftCols(S);
  out.noise_left = svd.U.rightCols(rows - S);
  out.signal_right = svd.V.leftCols(S);
  out.noise_right = svd.V.rightCols(cols - S);
  return out;
}

}  // namespace superres
