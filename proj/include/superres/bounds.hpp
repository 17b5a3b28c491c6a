#pragma once

// Closed-form constants and singular-value bounds, each reported together with
// a log of the hypotheses it was derived under, plus brute-force oracles for
// the on-grid quantities at tiny scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "superres/combinatorics.hpp"
#include "superres/error.hpp"
#include "superres/parallel.hpp"
#include "superres/torus.hpp"
#include "superres/vandermonde.hpp"

namespace superres {

struct HypothesisCheck {
  std::string label;
  double lhs = 0.0;
  std::string relation;  // one of ">=", ">", "<=", "<"
  double rhs = 0.0;
  bool holds = false;
};

struct BoundReport {
  std::string name;
  double value = 0.0;
  bool hypotheses_satisfied = true;
  std::vector<HypothesisCheck> hypothesis_log;
  std::vector<std::pair<std::string, double>> inputs;
  std::vector<int> lambdas;

  void check(std::string label, double lhs, std::string relation, double rhs) {
    bool ok = false;
    if (relation == ">=") ok = lhs >= rhs;
    else if (relation == ">") ok = lhs > rhs;
    else if (relation == "<=") ok = lhs <= rhs;
    else if (relation == "<") ok = lhs < rhs;
    else throw Error(ErrorCode::invalid_argument, "unknown relation " + relation);
    hypothesis_log.push_back({std::move(label), lhs, std::move(relation), rhs, ok});
    hypotheses_satisfied = hypotheses_satisfied && ok;
  }

  void input(std::string key, double v) { inputs.emplace_back(std::move(key), v); }
};

/// B(lambda, M), the clump constant of the complexity-based lower bound.
inline double constant_B(int lambda, int M) {
  if (lambda < 1) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  if (lambda > M)
    throw Error(ErrorCode::hypothesis_violation,
                "constant_B needs lambda <= M, got lambda=" + std::to_string(lambda) + " M=" + std::to_string(M));
  const double base = 20.0 * std::numbers::sqrt2 / 19.0;
  if (lambda == 1) return base;
  const double l = lambda;
  const double taylor = std::pow(1.0 - std::numbers::pi * std::numbers::pi / (3.0 * l * l), -(l - 1.0) / 2.0);
  const double rounding = std::pow((static_cast<double>(M) / l) / static_cast<double>(M / lambda), l - 1.0);
  return base * taylor * rounding;
}

/// C(lambda, M) = B (lambda/pi)^{lambda-1} (sum_j prod_{k!=j} (j-k)^{-2})^{1/2}.
inline double constant_C(int lambda, int M) {
  return constant_B(lambda, M) * std::pow(lambda / std::numbers::pi, lambda - 1.0) *
         std::sqrt(inverse_square_product_sum(lambda));
}

/// Threshold constant of the equispaced upper bound; zero for lambda = 1.
inline double equispaced_alpha_constant(int lambda) {
  return 2.0 * std::numbers::pi * equispaced_alpha_sum_exact(lambda).convert_to<double>();
}

/// C(M, S) of the lower restricted isometry bound.
inline double theta_constant(int M, int S) {
  if (S < 1 || M < S) throw Error(ErrorCode::invalid_argument, "theta constant needs 1 <= S <= M");
  const double s = S;
  const double pi = std::numbers::pi;
  return std::sqrt((12.0 - pi * pi) / 24.0) / std::sqrt(inverse_square_product_sum(S)) / std::sqrt(s) *
         std::pow(pi / s, s - 1.0) * std::pow(static_cast<double>(M) / s, -(s - 1.0)) *
         std::pow(static_cast<double>(M / S), s - 1.0);
}

/// Lower bound from node complexities. The support must decompose into clumps.
inline BoundReport clump1_lower(const SupportSet& omega, int M) {
  auto dec = decompose_clumps(omega, M);
  if (!dec) throw Error(ErrorCode::model_violation, "support is not a union of localized clumps for M=" + std::to_string(M));
  const auto rho = complexity(omega, M).rho;
  const int S = static_cast<int>(omega.size());

  BoundReport r;
  r.name = "clump1";
  r.input("M", M);
  r.input("S", S);
  r.input("A", static_cast<double>(dec->count()));
  double total = 0.0;
  double sep_needed = 0.0;
  for (const auto& clump : dec->clumps) {
    const int lambda = static_cast<int>(clump.size());
    r.lambdas.push_back(lambda);
    const double b = constant_B(lambda, M);
    for (std::size_t j : clump) {
      const double term = b * std::pow(lambda, lambda - 1.0) * rho[j];
      total += term * term;
      sep_needed = std::max(sep_needed, 10.0 * std::pow(lambda, 2.5) * std::pow(S * rho[j], 1.0 / (2.0 * lambda)) / M);
    }
  }
  r.value = std::sqrt(static_cast<double>(M)) / std::sqrt(total);
  r.check("M>=2S^2", M, ">=", 2.0 * S * S);
  if (dec->count() > 1) r.check("sep1", dec->min_interclump_dist, ">=", sep_needed);
  return r;
}

/// Lower bound in terms of alpha for clumps of the given sizes. The inter-clump
/// distance is needed only when there is more than one clump.
inline BoundReport clump2_lower(const std::vector<int>& lambdas, double alpha, int M,
                                std::optional<double> interclump_dist = std::nullopt) {
  if (lambdas.empty()) throw Error(ErrorCode::invalid_argument, "need at least one clump");
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be positive");
  int S = 0;
  int max_lambda = 0;
  for (int l : lambdas) {
    if (l < 1) throw Error(ErrorCode::invalid_argument, "clump sizes must be positive");
    S += l;
    max_lambda = std::max(max_lambda, l);
  }
  BoundReport r;
  r.name = "clump2";
  r.lambdas = lambdas;
  r.input("M", M);
  r.input("S", S);
  r.input("A", static_cast<double>(lambdas.size()));
  r.input("alpha", alpha);
  double total = 0.0;
  for (int l : lambdas) {
    const double term = constant_C(l, M) * std::pow(alpha, -l + 1.0);
    total += term * term;
  }
  r.value = std::sqrt(static_cast<double>(M)) / std::sqrt(total);
  r.check("M>=S^2", M, ">=", static_cast<double>(S) * S);
  r.check("max(lambda-1)<1/alpha", max_lambda - 1.0, "<", 1.0 / alpha);
  if (lambdas.size() > 1) {
    const double need = 20.0 * std::sqrt(static_cast<double>(S)) * std::pow(max_lambda, 2.5) / (std::sqrt(alpha) * M);
    r.input("interclump_dist", interclump_dist.value_or(std::numeric_limits<double>::quiet_NaN()));
    r.check("sep2", interclump_dist.value_or(std::numeric_limits<double>::quiet_NaN()), ">=", need);
  }
  return r;
}

/// clump2_lower with sizes, alpha = M * Delta and inter-clump distance read off a support set.
inline BoundReport clump2_lower(const SupportSet& omega, int M) {
  auto dec = decompose_clumps(omega, M);
  if (!dec) throw Error(ErrorCode::model_violation, "support is not a union of localized clumps for M=" + std::to_string(M));
  std::vector<int> sizes;
  for (auto n : dec->sizes()) sizes.push_back(static_cast<int>(n));
  const double alpha = omega.size() > 1 ? M * min_separation(omega) : 1.0;
  std::optional<double> gap;
  if (dec->count() > 1) gap = dec->min_interclump_dist;
  return clump2_lower(sizes, alpha, M, gap);
}

/// Upper bound on sigma_min for any support containing lambda nodes equispaced by alpha/M.
inline BoundReport upper_equispaced(int lambda, double alpha, int M) {
  if (lambda < 1) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  BoundReport r;
  r.name = "upper_equispaced";
  r.lambdas = {lambda};
  r.input("M", M);
  r.input("lambda", lambda);
  r.input("alpha", alpha);
  r.value = 2.0 * std::sqrt(M + 1.0) * std::pow(2.0 * std::numbers::pi * alpha, lambda - 1.0) /
            std::sqrt(binomial(2 * lambda - 2, lambda - 1));
  const double c = equispaced_alpha_constant(lambda);
  const double limit = c > 0.0 ? 1.0 / (c * std::sqrt(M + 1.0)) : std::numeric_limits<double>::infinity();
  r.check("alpha<=1/(C(lambda)sqrt(M+1))", alpha, "<=", limit);
  return r;
}

inline BoundReport theta_lower(int M, int N, int S) {
  BoundReport r;
  r.name = "theta_lower";
  r.input("M", M);
  r.input("N", N);
  r.input("S", S);
  r.value = theta_constant(M, S) * std::sqrt(static_cast<double>(M)) *
            std::pow(static_cast<double>(M) / N, S - 1.0);
  r.check("S>=2", S, ">=", 2);
  r.check("M>=2S", M, ">=", 2.0 * S);
  r.check("N>=piMS", N, ">=", std::numbers::pi * M * S);
  return r;
}

/// Nodes n/N for the given grid indices.
inline SupportSet grid_support(const std::vector<int>& indices, int N) {
  std::vector<double> pts;
  for (int i : indices) pts.push_back(static_cast<double>(i) / N);
  return SupportSet(pts);
}

struct ThetaSearch {
  double theta = 0.0;
  std::vector<int> argmin;  // grid indices of a minimizing subset
  std::uint64_t subsets = 0;

  /// True when the minimizer is S circularly consecutive grid nodes.
  bool argmin_consecutive(int N) const {
    const int S = static_cast<int>(argmin.size());
    if (S < 2) return true;
    for (int start = 0; start < S; ++start) {
      bool run = true;
      for (int k = 1; k < S && run; ++k) run = argmin[(start + k) % S] == (argmin[start] + k) % N;
      if (run) return true;
    }
    return false;
  }
};

inline constexpr std::uint64_t kEnumerationBudget = 1000000;

/// Calls visit(indices) on every S-subset of {0..N-1} in lexicographic order.
inline void for_each_subset(int N, int S, const std::function<void(const std::vector<int>&)>& visit) {
  if (S < 0 || S > N) return;
  std::vector<int> idx(static_cast<std::size_t>(S));
  for (int i = 0; i < S; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    int i = S - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == N - S + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < S; ++k) idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
  }
}

/// Exact lower restricted isometry constant by enumerating every S-subset of the 1/N grid.
inline ThetaSearch theta_bruteforce(int M, int N, int S) {
  if (S < 1 || N < S || M < 0) throw Error(ErrorCode::invalid_argument, "theta_bruteforce needs 1 <= S <= N");
  const BigInt count = binomial_exact(N, S);
  if (count > kEnumerationBudget)
    throw Error(ErrorCode::intractable_enumeration,
                "C(" + std::to_string(N) + "," + std::to_string(S) + ") exceeds the enumeration budget");
  std::vector<std::vector<int>> subsets;
  subsets.reserve(count.convert_to<std::size_t>());
  for_each_subset(N, S, [&](const std::vector<int>& idx) { subsets.push_back(idx); });

  std::vector<double> sigma(subsets.size());
  parallel_for(subsets.size(), [&](std::size_t i) { sigma[i] = sigma_extremes(vandermonde(grid_support(subsets[i], N), M)).min; });

  ThetaSearch out;
  out.subsets = subsets.size();
  std::size_t best = 0;
  for (std::size_t i = 1; i < sigma.size(); ++i)
    if (sigma[i] < sigma[best]) best = i;
  out.theta = sigma[best];
  out.argmin = subsets[best];
  return out;
}

/// sigma_min on S consecutive nodes of the 1/N grid.
inline double theta_star(int M, int N, int S) {
  if (S < 1 || S > N) throw Error(ErrorCode::invalid_argument, "theta_star needs 1 <= S <= N");
  std::vector<int> idx(static_cast<std::size_t>(S));
  for (int i = 0; i < S; ++i) idx[static_cast<std::size_t>(i)] = i;
  return sigma_extremes(vandermonde(grid_support(idx, N), M)).min;
}

struct MinMaxBounds {
  BoundReport lower;
  BoundReport upper;
  int M = 0, N = 0, S = 0;
  double delta = 0.0;
};

inline MinMaxBounds minmax_bounds(int M, int N, int S, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  MinMaxBounds out{{}, {}, M, N, S, delta};
  const double s2 = 2.0 * S;

  auto& up = out.upper;
  up.name = "minmax_upper";
  up.input("M", M);
  up.input("N", N);
  up.input("S", S);
  up.input("delta", delta);
  up.value = 2.0 * delta / theta_constant(M, 2 * S) / std::sqrt(static_cast<double>(M)) *
             std::pow(static_cast<double>(N) / M, s2 - 1.0);
  up.check("M>=4S", M, ">=", 4.0 * S);
  up.check("N>=2piMS", N, ">=", 2.0 * std::numbers::pi * M * S);

  auto& lo = out.lower;
  lo.name = "minmax_lower";
  lo.inputs = up.inputs;
  lo.value = delta / 4.0 * std::sqrt(binomial(4 * S - 2, 2 * S - 1)) / std::sqrt(M + 1.0) *
             std::pow(static_cast<double>(N) / (2.0 * std::numbers::pi * M), s2 - 1.0);
  lo.check("M>=2S+1", M, ">=", 2.0 * S + 1.0);
  lo.check("N/M>=2piC(2S)sqrt(M+1)", static_cast<double>(N) / M, ">=",
           2.0 * std::numbers::pi * equispaced_alpha_constant(2 * S) * std::sqrt(M + 1.0));
  return out;
}

/// Noise level below which the correlation-function perturbation is at most
/// epsilon with high probability, for pencil length M/2.
inline BoundReport music_noise_tolerance(const std::vector<int>& lambdas, double alpha, int M, double nu, double epsilon,
                                         std::optional<double> interclump_dist = std::nullopt) {
  if (M % 2 != 0) throw Error(ErrorCode::even_m_required, "M must be even, got " + std::to_string(M));
  if (!(nu > 1.0)) throw Error(ErrorCode::invalid_argument, "nu must exceed 1");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be positive");
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be positive");
  if (lambdas.empty()) throw Error(ErrorCode::invalid_argument, "need at least one clump");
  int S = 0;
  int max_lambda = 0;
  for (int l : lambdas) {
    S += l;
    max_lambda = std::max(max_lambda, l);
  }
  BoundReport r;
  r.name = "music_tolerance";
  r.lambdas = lambdas;
  r.input("M", M);
  r.input("S", S);
  r.input("A", static_cast<double>(lambdas.size()));
  r.input("alpha", alpha);
  r.input("nu", nu);
  r.input("epsilon", epsilon);
  double total = 0.0;
  for (int l : lambdas) {
    const double c = constant_C(l, M / 2);
    total += c * c * std::pow(alpha, -2.0 * (l - 1.0));
  }
  const double m = M;
  r.value = m / (32.0 * std::sqrt(nu * (m + 2.0) * std::log(m + 2.0))) / total * epsilon;
  r.check("M>=2S^2", M, ">=", 2.0 * S * S);
  r.check("max(lambda-1)<1/alpha", max_lambda - 1.0, "<", 1.0 / alpha);
  if (lambdas.size() > 1) {
    const double need = 20.0 * std::sqrt(static_cast<double>(S)) * std::pow(max_lambda, 2.5) / (std::sqrt(alpha) * M);
    r.input("interclump_dist", interclump_dist.value_or(std::numeric_limits<double>::quiet_NaN()));
    r.check("sep2", interclump_dist.value_or(std::numeric_limits<double>::quiet_NaN()), ">=", need);
  }
  return r;
}

struct HankelNoiseBound {
  double mean_bound = 0.0;
  double sigma = 0.0;
  int width = 0;  // max(L+1, M-L+1)
  int M = 0;

  /// Upper bound on P(||H(eta)|| >= t).
  double tail(double t) const {
    if (sigma == 0.0) return t > 0.0 ? 0.0 : 1.0;
    return (M + 2.0) * std::exp(-t * t / (2.0 * sigma * sigma * width));
  }
};

inline HankelNoiseBound hankel_noise_bound(int M, int L, double sigma) {
  if (L < 1 || L > M) throw Error(ErrorCode::bad_pencil_parameter, "need 1 <= L <= M");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be nonnegative");
  HankelNoiseBound b;
  b.sigma = sigma;
  b.M = M;
  b.width = std::max(L + 1, M - L + 1);
  b.mean_bound = sigma * std::sqrt(2.0 * b.width * std::log(M + 2.0));
  return b;
}

// ---------------------------------------------------------------------------
// Sparse decoding on the 1/N grid.

struct SparseFit {
  std::vector<int> support;
  CVector coefficients;  // on support
  double residual = 0.0;
};

/// Sparsest grid vector whose first M+1 Fourier coefficients are within delta of y.
/// Among feasible supports of the smallest size the one with least residual wins.
inline SparseFit sparsest_fit(const CVector& y, int N, int max_sparsity, double delta) {
  const int M = static_cast<int>(y.size()) - 1;
  const double tol = delta + 1e-12 * std::max(1.0, y.norm());
  if (y.norm() <= tol) return {{}, CVector(0), y.norm()};
  for (int k = 1; k <= max_sparsity; ++k) {
    if (binomial_exact(N, k) > kEnumerationBudget)
      throw Error(ErrorCode::intractable_enumeration, "sparse search exceeds the enumeration budget");
    SparseFit best;
    best.residual = std::numeric_limits<double>::infinity();
    for_each_subset(N, k, [&](const std::vector<int>& idx) {
      CMatrix phi = vandermonde(grid_support(idx, N), M);
      // grid_support sorts; indices are already ascending so columns line up
      CVector c = phi.colPivHouseholderQr().solve(y);
      const double res = (phi * c - y).norm();
      if (res < best.residual) best = {idx, c, res};
    });
    if (best.residual <= tol) return best;
  }
  throw Error(ErrorCode::numeric_failure, "no feasible vector with sparsity <= " + std::to_string(max_sparsity));
}

/// Expands a sparse fit to a length-N vector.
inline CVector dense_from_sparse(const SparseFit& f, int N) {
  CVector x = CVector::Zero(N);
  for (std::size_t i = 0; i < f.support.size(); ++i) x(f.support[i]) = f.coefficients(static_cast<Eigen::Index>(i));
  return x;
}

struct SandwichReport {
  double theta_2s = 0.0;
  double upper = 0.0;  // 2 delta / Theta(M, N, 2S)
  double lower = 0.0;  // delta / (2 Theta(M, N, 2S))
  double max_error = 0.0;
  int trials = 0;
  int violations = 0;
  double adversarial_error = 0.0;  // max over the two members of the adversarial pair
  bool adversarial_ok = false;
};

/// Runs the sparsest-fit decoder on random S-sparse grid signals with ||eta|| = delta
/// and checks the decoder error against 2 delta / Theta(M, N, 2S).
inline SandwichReport demanet_sandwich_check(int M, int N, int S, double delta, int trials, std::uint64_t seed) {
  if (N > 16 || S > 2) throw Error(ErrorCode::intractable_enumeration, "sandwich check limited to N <= 16, S <= 2");
  if (2 * S > M || M > N) throw Error(ErrorCode::invalid_argument, "need 2S <= M <= N");
  if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be nonnegative");
  SandwichReport rep;
  const ThetaSearch th = theta_bruteforce(M, N, 2 * S);
  rep.theta_2s = th.theta;
  rep.upper = 2.0 * delta / th.theta;
  rep.lower = delta / (2.0 * th.theta);
  rep.trials = trials;

  CMatrix F(M + 1, N);
  for (int n = 0; n < N; ++n) F.col(n) = steering_vector(TorusPoint(static_cast<double>(n) / N), M);

  std::vector<double> errors(static_cast<std::size_t>(trials));
  parallel_for(errors.size(), [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::vector<int> pool(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::shuffle(pool.begin(), pool.end(), rng);
    CVector x = CVector::Zero(N);
    std::uniform_real_distribution<double> mag(0.5, 2.0), phase(0.0, 1.0);
    for (int k = 0; k < S; ++k) x(pool[static_cast<std::size_t>(k)]) = mag(rng) * unit_phasor(phase(rng));
    CVector eta = complex_gaussian(M + 1, 1.0, rng);
    eta *= delta / eta.norm();
    const CVector y = F * x + eta;
    const SparseFit fit = sparsest_fit(y, N, S, delta);
    errors[t] = (dense_from_sparse(fit, N) - x).norm();
  });
  for (double e : errors) {
    rep.max_error = std::max(rep.max_error, e);
    if (e > rep.upper * (1.0 + 1e-9) + 1e-12) ++rep.violations;
  }

  // Adversarial pair: the Theta-minimizing unit vector v on 2S nodes, scaled by
  // delta/Theta and split into two S-sparse halves v1 - v2. Both produce data
  // within delta of y = F v1, so a decoder must err by >= delta/(2 Theta) on one.
  if (delta > 0.0) {
    CMatrix phi = vandermonde(grid_support(th.argmin, N), M);
    Eigen::JacobiSVD<CMatrix> svd(phi, Eigen::ComputeThinV);
    CVector v = svd.matrixV().col(svd.matrixV().cols() - 1) * (delta / th.theta);
    CVector v1 = CVector::Zero(N), v2 = CVector::Zero(N);
    for (int k = 0; k < 2 * S; ++k) {
      const int n = th.argmin[static_cast<std::size_t>(k)];
      if (k < S) v1(n) = v(k);
      else v2(n) = -v(k);
    }
    const CVector y = F * v1;
    const SparseFit fit = sparsest_fit(y, N, S, delta);
    const CVector est = dense_from_sparse(fit, N);
    rep.adversarial_error = std::max((est - v1).norm(), (est - v2).norm());
    rep.adversarial_ok = rep.adversarial_error >= rep.lower * (1.0 - 1e-9);
  } else {
    rep.adversarial_ok = true;
  }
  return rep;
}

}  // namespace superres
