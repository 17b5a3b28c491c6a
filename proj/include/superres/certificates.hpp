#pragma once

// Interpolating trigonometric polynomials that certify lower bounds on
// sigma_min through duality, and the E functional of the on-grid construction.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "superres/bounds.hpp"
#include "superres/combinatorics.hpp"
#include "superres/error.hpp"
#include "superres/torus.hpp"
#include "superres/trig_poly.hpp"
#include "superres/vandermonde.hpp"

namespace superres {

namespace detail {

// prod_k (e^{2 pi i q w} - e^{2 pi i q w_k}) / (e^{2 pi i q w_j} - e^{2 pi i q w_k})
// with one frequency q per factor.
inline TrigPoly lagrange_like(double wj, const std::vector<double>& others, const std::vector<int>& q) {
  TrigPoly g = TrigPoly::constant(1.0);
  for (std::size_t i = 0; i < others.size(); ++i) {
    const Complex zk = unit_phasor(q[i] * others[i]);
    const Complex den = unit_phasor(q[i] * wj) - zk;
    if (std::abs(den) < 1e-300) throw Error(ErrorCode::numeric_failure, "vanishing interpolation denominator");
    g = g.times_binomial(-zk / den, 1.0 / den, q[i]);
  }
  return g;
}

inline TrigPoly centred_fejer(int P, double wj) { return fejer(P).translated(wj); }

}  // namespace detail

/// Localized certificate for node j: equals 1 at w_j, 0 at the rest of its clump
/// and is small on other clumps. Singletons use the modulated Fejer kernel of
/// order floor(M/2) so the result stays inside frequencies 0..M.
inline TrigPoly certificate_I(const SupportSet& omega, int M, const ClumpDecomposition& dec, std::size_t j) {
  if (j >= omega.size()) throw Error(ErrorCode::invalid_argument, "node index out of range");
  const auto& clump = dec.clumps[dec.clump_of[j]];
  const int lambda = static_cast<int>(clump.size());
  const double wj = omega[j];
  if (lambda == 1) {
    if (M < 2) throw Error(ErrorCode::hypothesis_violation, "singleton certificate needs M >= 2");
    return detail::centred_fejer(M / 2, wj);
  }
  const int Q = M / lambda;
  const int P = M / (2 * lambda * lambda);
  if (P < 1)
    throw Error(ErrorCode::hypothesis_violation,
                "clump of size " + std::to_string(lambda) + " needs M >= 2 lambda^2, got M=" + std::to_string(M));
  std::vector<double> others;
  for (std::size_t k : clump)
    if (k != j) others.push_back(omega[k]);
  const TrigPoly g = detail::lagrange_like(wj, others, std::vector<int>(others.size(), Q));
  const TrigPoly h = detail::centred_fejer(P, wj).pow(lambda);
  return g * h;
}

inline TrigPoly certificate_I(const SupportSet& omega, int M, std::size_t j) {
  auto dec = decompose_clumps(omega, M);
  if (!dec) throw Error(ErrorCode::model_violation, "support is not a union of localized clumps");
  return certificate_I(omega, M, *dec, j);
}

/// Grid indices of an on-grid support; throws when a node is off the 1/N grid.
inline std::vector<int> grid_indices(const SupportSet& omega, int N) {
  std::vector<int> idx;
  for (double w : omega) {
    const double scaled = w * N;
    const double r = std::round(scaled);
    if (std::fabs(scaled - r) > 1e-8 * std::max(1.0, scaled))
      throw Error(ErrorCode::invalid_support, "node is not on the 1/N grid");
    idx.push_back(static_cast<int>(r) % N);
  }
  return idx;
}

/// Circular grid distance in steps.
inline int grid_steps(int a, int b, int N) {
  const int d = ((a - b) % N + N) % N;
  return std::min(d, N - d);
}

struct GridWindows {
  std::vector<int> gamma;  // |{k : dist < 1/M}|, node itself included
  std::vector<int> tau;    // |{k : dist < S/(2M)}|
};

inline GridWindows grid_windows(const std::vector<int>& idx, int M, int N) {
  const int S = static_cast<int>(idx.size());
  GridWindows w{std::vector<int>(static_cast<std::size_t>(S), 0), std::vector<int>(static_cast<std::size_t>(S), 0)};
  for (int j = 0; j < S; ++j)
    for (int k = 0; k < S; ++k) {
      const long steps = grid_steps(idx[j], idx[k], N);
      if (static_cast<long>(M) * steps < N) ++w.gamma[j];
      if (2L * M * steps < static_cast<long>(S) * N) ++w.tau[j];
    }
  return w;
}

/// On-grid certificate for node j: interpolates the Kronecker delta on all of
/// the support and lies in frequencies 0..M.
inline TrigPoly certificate_H_grid(const SupportSet& omega, int M, int N, std::size_t j) {
  const int S = static_cast<int>(omega.size());
  if (j >= omega.size()) throw Error(ErrorCode::invalid_argument, "node index out of range");
  if (S < 2 || M < 2 * S)
    throw Error(ErrorCode::hypothesis_violation, "grid certificate needs S >= 2 and M >= 2S");
  const auto idx = grid_indices(omega, N);
  const int P = M / (2 * S);
  std::vector<double> others;
  std::vector<int> q;
  for (int k = 0; k < S; ++k) {
    if (k == static_cast<int>(j)) continue;
    const long steps = grid_steps(idx[j], idx[k], N);
    const bool near = 2L * M * steps < static_cast<long>(S) * N;
    others.push_back(omega[static_cast<std::size_t>(k)]);
    q.push_back(near ? M / S : static_cast<int>(N / (2 * steps)));
  }
  const TrigPoly g = detail::lagrange_like(omega[j], others, q);
  return detail::centred_fejer(P, omega[j]) * g;
}

/// E(Omega) for an on-grid support.
inline double evaluate_E(const SupportSet& omega, int M, int N) {
  const int S = static_cast<int>(omega.size());
  const auto idx = grid_indices(omega, N);
  const auto win = grid_windows(idx, M, N);
  const double floor_ms = M / S;
  double total = 0.0;
  for (int j = 0; j < S; ++j) {
    const int tau = win.tau[j];
    const int gamma = win.gamma[j];
    double term = std::pow(floor_ms, -2.0 * tau + 2.0) * std::pow(std::numbers::pi, -2.0 * (gamma - 1)) *
                  std::pow(4.0, S - 2.0 * tau + gamma);
    for (int k = 0; k < S; ++k) {
      if (k == j) continue;
      const long steps = grid_steps(idx[j], idx[k], N);
      if (2L * M * steps < static_cast<long>(S) * N) {
        const double d = static_cast<double>(steps) / N;
        term /= d * d;
      }
    }
    total += term;
  }
  return total;
}

/// E at S consecutive grid nodes, in closed form.
inline double E_star(int M, int N, int S) {
  const double s = S;
  return std::pow(static_cast<double>(M / S), -2.0 * s + 2.0) * std::pow(static_cast<double>(N), 2.0 * s - 2.0) *
         std::pow(std::numbers::pi, -(2.0 * s - 2.0)) * inverse_square_product_sum(S);
}

/// Right bound on the aggregate certificate norm, C(M,S)^{-1} M^{-1/2} (N/M)^{S-1}.
inline double grid_aggregate_norm_bound(int M, int N, int S) {
  return 1.0 / (theta_constant(M, S) * std::sqrt(static_cast<double>(M))) *
         std::pow(static_cast<double>(N) / M, S - 1.0);
}

enum class CertificateMode { clump, grid };

struct DualityBound {
  double value = 0.0;          // (1 - ||eps||) / ||f||, or 0
  double residual_norm = 0.0;  // ||eps||
  double certificate_norm = 0.0;
  double sigma_min = 0.0;      // the numeric value being certified
};

/// Right singular vector of sigma_min, phase-normalized so that its
/// largest-magnitude entry is real and positive.
inline CVector min_right_singular_vector(const CMatrix& phi, double* sigma_min = nullptr) {
  Eigen::JacobiSVD<CMatrix> svd(phi, Eigen::ComputeThinV);
  const Eigen::Index last = svd.singularValues().size() - 1;
  if (sigma_min) *sigma_min = svd.singularValues()(last);
  CVector v = svd.matrixV().col(last);
  Eigen::Index big = 0;
  v.cwiseAbs().maxCoeff(&big);
  v *= std::conj(v(big)) / std::abs(v(big));
  return v;
}

/// Lower bound on sigma_min from the certificate f = sum_j v_j I_j (or H_j)
/// evaluated at the minimal right singular vector v.
inline DualityBound duality_lower_bound(const SupportSet& omega, int M, CertificateMode mode, int N = 0) {
  const std::size_t S = omega.size();
  const CMatrix phi = vandermonde(omega, M);
  DualityBound out;
  const CVector v = min_right_singular_vector(phi, &out.sigma_min);

  std::optional<ClumpDecomposition> dec;
  if (mode == CertificateMode::clump) {
    dec = decompose_clumps(omega, M);
    if (!dec) throw Error(ErrorCode::model_violation, "support is not a union of localized clumps");
  } else if (N < 1) {
    throw Error(ErrorCode::invalid_argument, "grid mode needs N");
  }

  TrigPoly f = TrigPoly::constant(0.0);
  for (std::size_t j = 0; j < S; ++j) {
    TrigPoly cj = mode == CertificateMode::clump ? certificate_I(omega, M, *dec, j) : certificate_H_grid(omega, M, N, j);
    f = f + v(static_cast<Eigen::Index>(j)) * cj;
  }
  if (f.effective_degree(0.0) > M) throw Error(ErrorCode::numeric_failure, "certificate exceeds frequency budget");

  CVector eps(static_cast<Eigen::Index>(S));
  for (std::size_t k = 0; k < S; ++k) eps(static_cast<Eigen::Index>(k)) = f(omega[k]) - v(static_cast<Eigen::Index>(k));
  out.residual_norm = eps.norm();
  out.certificate_norm = f.l2_norm();
  out.value = out.residual_norm < 1.0 ? (1.0 - out.residual_norm) / out.certificate_norm : 0.0;
  return out;
}

struct ClumpCertificateCheck {
  double max_interp_error = 0.0;  // |I_j(w_k) - delta_jk| over home clumps
  double max_offclump = 0.0;      // max |I_j(w_k)| with w_k in another clump
  double offclump_limit = 0.0;    // 1/(20 S)
  double max_norm_ratio = 0.0;    // max ||I_j|| / ((2/M)^{1/2} B lambda^{lambda-1} rho_j)
  int max_degree = 0;
  int degree_limit = 0;
  bool sep1_holds = true;  // hypotheses under which the off-clump bound is promised

  bool ok(double tol = 1e-8) const {
    return max_interp_error <= tol && max_degree <= degree_limit && max_norm_ratio <= 1.0 + 1e-12 &&
           (!sep1_holds || max_offclump <= offclump_limit);
  }
};

/// Builds every localized certificate and measures how well each one meets its interpolation, degree, norm and decay limits.
inline ClumpCertificateCheck check_clump_certificates(const SupportSet& omega, int M) {
  auto dec = decompose_clumps(omega, M);
  if (!dec) throw Error(ErrorCode::model_violation, "support is not a union of localized clumps");
  const auto rho = complexity(omega, M).rho;
  const std::size_t S = omega.size();
  const BoundReport c1 = clump1_lower(omega, M);
  ClumpCertificateCheck out;
  out.offclump_limit = 1.0 / (20.0 * S);
  out.degree_limit = M;
  out.sep1_holds = c1.hypotheses_satisfied;

  std::vector<TrigPoly> certs(S);
  parallel_for(S, [&](std::size_t j) { certs[j] = certificate_I(omega, M, *dec, j); });
  for (std::size_t j = 0; j < S; ++j) {
    const TrigPoly& f = certs[j];
    const int lambda = static_cast<int>(dec->size_of(dec->clump_of[j]));
    out.max_degree = std::max(out.max_degree, f.effective_degree(0.0));
    for (std::size_t k = 0; k < S; ++k) {
      const Complex val = f(omega[k]);
      if (dec->clump_of[k] == dec->clump_of[j]) {
        out.max_interp_error = std::max(out.max_interp_error, std::abs(val - Complex(k == j ? 1.0 : 0.0)));
      } else {
        out.max_offclump = std::max(out.max_offclump, std::abs(val));
      }
    }
    const double norm_bound =
        std::sqrt(2.0 / M) * constant_B(lambda, M) * std::pow(lambda, lambda - 1.0) * rho[j];
    out.max_norm_ratio = std::max(out.max_norm_ratio, f.l2_norm() / norm_bound);
  }
  return out;
}

struct GridCertificateCheck {
  double max_interp_error = 0.0;
  double aggregate_norm = 0.0;  // (sum_j ||H_j||^2)^{1/2}
  double aggregate_bound = 0.0;
  double e_value = 0.0;
  double e_star = 0.0;
  int max_degree = 0;
  int degree_limit = 0;
  bool hypotheses = true;  // S >= 2, M >= 2S, N >= pi M S

  bool ok(double tol = 1e-8) const {
    return max_interp_error <= tol && max_degree <= degree_limit &&
           (!hypotheses || (aggregate_norm <= aggregate_bound * (1 + 1e-12) && e_value <= e_star * (1 + 1e-12)));
  }
};

inline GridCertificateCheck check_grid_certificates(const SupportSet& omega, int M, int N) {
  const int S = static_cast<int>(omega.size());
  GridCertificateCheck out;
  out.degree_limit = M;
  out.hypotheses = S >= 2 && M >= 2 * S && N >= std::numbers::pi * M * S;
  double sq = 0.0;
  for (int j = 0; j < S; ++j) {
    const TrigPoly h = certificate_H_grid(omega, M, N, static_cast<std::size_t>(j));
    out.max_degree = std::max(out.max_degree, h.effective_degree(0.0));
    sq += h.l2_norm() * h.l2_norm();
    for (int k = 0; k < S; ++k)
      out.max_interp_error =
          std::max(out.max_interp_error, std::abs(h(omega[static_cast<std::size_t>(k)]) - Complex(k == j ? 1.0 : 0.0)));
  }
  out.aggregate_norm = std::sqrt(sq);
  out.aggregate_bound = grid_aggregate_norm_bound(M, N, S);
  out.e_value = evaluate_E(omega, M, N);
  out.e_star = E_star(M, N, S);
  return out;
}

}  // namespace superres
