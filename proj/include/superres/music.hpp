#pragma once

// MUSIC: noise-space correlation and imaging functions of a Hankel pencil,
// peak picking on a uniform grid, and Monte-Carlo checks of its perturbation
// theory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "superres/bounds.hpp"
#include "superres/error.hpp"
#include "superres/parallel.hpp"
#include "superres/torus.hpp"
#include "superres/trig_poly.hpp"
#include "superres/vandermonde.hpp"

namespace superres {

struct MusicConfig {
  int S = 1;
  std::optional<int> L;          // default floor(M/2)
  std::optional<int> grid_size;  // default 16 M
  bool refine = false;           // golden-section refinement of each picked peak

  int pencil(int M) const { return L.value_or(M / 2); }
  int grid(int M) const { return grid_size.value_or(16 * M); }

  void validate(int M) const {
    const int l = pencil(M);
    if (S < 1) throw Error(ErrorCode::invalid_argument, "S must be positive");
    if (M + 1 < 2 * S) throw Error(ErrorCode::bad_pencil_parameter, "MUSIC needs M+1 >= 2S");
    if (l < S || M - l + 1 < S)
      throw Error(ErrorCode::bad_pencil_parameter,
                  "need L >= S and M-L+1 >= S, got L=" + std::to_string(l) + " S=" + std::to_string(S));
    if (grid(M) < 16 * M) throw Error(ErrorCode::invalid_argument, "grid size must be at least 16 M");
  }
};

/// R(w) = ||W* phi_L(w)|| / ||phi_L(w)|| for the noise space W of H(y).
class NoiseSpaceCorrelation {
 public:
  NoiseSpaceCorrelation(const CVector& y, int S, int L) : L_(L) {
    const CMatrix h = hankel(y, L);
    if (S < 1 || S >= h.rows() || S > h.cols())
      throw Error(ErrorCode::bad_pencil_parameter, "need 1 <= S <= L and S <= M-L+1, got S=" + std::to_string(S));
    LeftSvd svd = left_svd(h);
    singular_values_ = std::move(svd.singular_values);
    W_ = svd.U.rightCols(h.rows() - S);
  }

  int L() const { return L_; }
  const CMatrix& noise_basis() const { return W_; }
  const Eigen::VectorXd& singular_values() const { return singular_values_; }

  double operator()(double w) const {
    const CVector phi = steering_vector(TorusPoint(w), L_);
    return std::min(1.0, (W_.adjoint() * phi).norm() / std::sqrt(L_ + 1.0));
  }

  /// R at g/G, g = 0..G-1. R^2 is a trigonometric polynomial whose lag-d
  /// coefficient is the d-th diagonal sum of W W*, so one FFT covers the grid.
  /// Values near zero lose relative accuracy in that sum and are recomputed directly.
  Eigen::VectorXd on_grid(int G) const {
    if (G < 1) throw Error(ErrorCode::invalid_argument, "grid size must be positive");
    const CMatrix P = W_ * W_.adjoint();
    const Eigen::Index n = P.rows();
    std::vector<Complex> folded(static_cast<std::size_t>(G), Complex(0.0));
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index k = 0; k < n; ++k) {
        const long d = static_cast<long>(m - k);
        folded[static_cast<std::size_t>(((d % G) + G) % G)] += P(m, k);
      }
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<Complex> values;
    fft.inv(values, folded);
    Eigen::VectorXd r(G);
    for (int g = 0; g < G; ++g) {
      const double r2 = values[static_cast<std::size_t>(g)].real() / (L_ + 1.0);
      r(g) = r2 < 1e-8 ? (*this)(static_cast<double>(g) / G) : std::sqrt(std::min(r2, 1.0));
    }
    return r;
  }

 private:
  int L_;
  CMatrix W_;
  Eigen::VectorXd singular_values_;
};

inline double correlation(const Measurements& y, const MusicConfig& cfg, TorusPoint w) {
  cfg.validate(y.M);
  return NoiseSpaceCorrelation(y.y, cfg.S, cfg.pencil(y.M))(w.value());
}

struct MusicResult {
  SupportSet recovered;
  Eigen::VectorXd imaging_samples;      // J = 1/R on the grid
  Eigen::VectorXd correlation_samples;  // R on the grid
  Eigen::VectorXd singular_values;
  std::vector<int> peak_indices;
  double gap = 0.0;  // sigma_S / sigma_{S+1}
  bool degenerate = false;
  int grid_size = 0;
};

/// Circular strict local minima of r, ordered by value then index.
inline std::vector<int> correlation_minima(const Eigen::VectorXd& r) {
  const Eigen::Index G = r.size();
  std::vector<int> minima;
  for (Eigen::Index g = 0; g < G; ++g) {
    const double prev = r((g + G - 1) % G);
    const double next = r((g + 1) % G);
    if (r(g) < prev && r(g) < next) minima.push_back(static_cast<int>(g));
  }
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return r(a) < r(b); });
  return minima;
}

namespace detail {

inline double golden_min(const NoiseSpaceCorrelation& R, double lo, double hi) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = R(c), fd = R(d);
  for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = R(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = R(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// MUSIC on a uniform grid: the S largest strict local maxima of the imaging function.
inline MusicResult recover(const Measurements& y, const MusicConfig& cfg) {
  cfg.validate(y.M);
  const int G = cfg.grid(y.M);
  const NoiseSpaceCorrelation R(y.y, cfg.S, cfg.pencil(y.M));

  MusicResult out;
  out.grid_size = G;
  out.correlation_samples = R.on_grid(G);
  out.imaging_samples = out.correlation_samples.unaryExpr(
      [](double r) { return r > 0.0 ? 1.0 / r : std::numeric_limits<double>::infinity(); });
  out.singular_values = R.singular_values();
  const double tail = out.singular_values(cfg.S);
  out.gap = tail > 0.0 ? out.singular_values(cfg.S - 1) / tail : std::numeric_limits<double>::infinity();

  std::vector<int> peaks = correlation_minima(out.correlation_samples);
  if (static_cast<int>(peaks.size()) > cfg.S) peaks.resize(static_cast<std::size_t>(cfg.S));
  if (static_cast<int>(peaks.size()) < cfg.S) {
    out.degenerate = true;
    std::vector<int> order(static_cast<std::size_t>(G));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return out.correlation_samples(a) < out.correlation_samples(b); });
    for (int g : order) {
      if (static_cast<int>(peaks.size()) == cfg.S) break;
      if (std::find(peaks.begin(), peaks.end(), g) == peaks.end()) peaks.push_back(g);
    }
  }
  out.peak_indices = peaks;

  std::vector<double> pts;
  for (int g : peaks) pts.push_back(static_cast<double>(g) / G);
  if (cfg.refine) {
    std::vector<double> refined;
    for (int g : peaks) refined.push_back(wrap_unit(detail::golden_min(R, (g - 1.0) / G, (g + 1.0) / G)));
    bool distinct = true;
    for (std::size_t i = 0; i < refined.size() && distinct; ++i)
      for (std::size_t k = i + 1; k < refined.size() && distinct; ++k)
        distinct = torus_dist(refined[i], refined[k]) >= kNodeTolerance * 10;
    if (distinct) pts = std::move(refined);
  }
  out.recovered = SupportSet(pts);
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation theory checks.

struct PerturbationReport {
  int trials = 0;
  int precondition_held = 0;
  int violations = 0;
  double max_ratio = 0.0;   // max over gated trials of sup|R_hat - R| / bound
  double mean_ratio = 0.0;
};

/// Draws eta, gates on 2||H(eta)|| < x_min sigma_min(Phi_L) sigma_min(Phi_{M-L}) and
/// compares sup_grid |R_hat - R| with 2||H(eta)|| / (x_min sigma_min(Phi_L) sigma_min(Phi_{M-L})).
inline PerturbationReport perturbation_check(const SpikeSignal& signal, int M, int L, double sigma, int trials,
                                             std::uint64_t seed, int grid_size = 0) {
  const int S = static_cast<int>(signal.size());
  MusicConfig cfg{S, L, grid_size > 0 ? std::optional<int>(grid_size) : std::nullopt, false};
  cfg.validate(M);
  const int G = cfg.grid(M);
  const double denom = signal.x_min() * sigma_extremes(vandermonde(signal.support(), L)).min *
                       sigma_extremes(vandermonde(signal.support(), M - L)).min;
  const Measurements clean = synthesize(signal, M, 0.0, seed);
  const Eigen::VectorXd r0 = NoiseSpaceCorrelation(clean.y, S, L).on_grid(G);

  std::vector<double> ratio(static_cast<std::size_t>(trials), -1.0);
  parallel_for(ratio.size(), [&](std::size_t t) {
    const Measurements noisy = synthesize(signal, M, sigma, derive_seed(seed, t));
    const double hn = spectral_norm(hankel(*noisy.noise, L));
    if (!(2.0 * hn < denom)) return;
    const double bound = 2.0 * hn / denom;
    const double sup = (NoiseSpaceCorrelation(noisy.y, S, L).on_grid(G) - r0).cwiseAbs().maxCoeff();
    ratio[t] = bound > 0.0 ? sup / bound : (sup > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
  });

  PerturbationReport rep;
  rep.trials = trials;
  double sum = 0.0;
  for (double q : ratio) {
    if (q < 0.0) continue;
    ++rep.precondition_held;
    sum += q;
    rep.max_ratio = std::max(rep.max_ratio, q);
    if (q > 1.0 + 1e-9) ++rep.violations;
  }
  if (rep.precondition_held > 0) rep.mean_ratio = sum / rep.precondition_held;
  return rep;
}

/// ||H(eta)||_2 for independent noise draws.
inline std::vector<double> sample_hankel_noise_norms(int M, int L, double sigma, int draws, std::uint64_t seed) {
  if (L < 1 || L > M) throw Error(ErrorCode::bad_pencil_parameter, "need 1 <= L <= M");
  std::vector<double> out(static_cast<std::size_t>(draws));
  parallel_for(out.size(), [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    out[t] = spectral_norm(hankel(complex_gaussian(M + 1, sigma, rng), L));
  });
  return out;
}

struct NoiseToleranceReport {
  BoundReport tolerance;
  double sigma = 0.0;
  double epsilon = 0.0;
  int trials = 0;
  int successes = 0;
  double pass_rate = 0.0;
  double promised = 0.0;  // 1 - (M+2)^{-(nu-1)}
  double required = 0.0;  // promised minus three binomial standard deviations
  bool passed = false;
};

/// Sets sigma just below the tolerance threshold and measures how often
/// sup_grid |R_hat - R| <= epsilon with L = M/2.
inline NoiseToleranceReport theorem34_check(const SpikeSignal& signal, int M, double nu, double epsilon, int trials,
                                       std::uint64_t seed, double sigma_factor = 0.99) {
  if (M % 2 != 0) throw Error(ErrorCode::even_m_required, "M must be even, got " + std::to_string(M));
  auto dec = decompose_clumps(signal.support(), M);
  if (!dec) throw Error(ErrorCode::model_violation, "support is not a union of localized clumps");
  std::vector<int> sizes;
  for (auto n : dec->sizes()) sizes.push_back(static_cast<int>(n));
  const double alpha = signal.size() > 1 ? M * min_separation(signal.support()) : 1.0;
  std::optional<double> gap;
  if (dec->count() > 1) gap = dec->min_interclump_dist;

  NoiseToleranceReport rep;
  rep.tolerance = music_noise_tolerance(sizes, alpha, M, nu, epsilon, gap);
  rep.sigma = sigma_factor * rep.tolerance.value * signal.x_min();
  rep.epsilon = epsilon;
  rep.trials = trials;

  const int S = static_cast<int>(signal.size());
  const int L = M / 2;
  const int G = 16 * M;
  const Eigen::VectorXd r0 = NoiseSpaceCorrelation(synthesize(signal, M, 0.0, seed).y, S, L).on_grid(G);
  std::vector<char> ok(static_cast<std::size_t>(trials), 0);
  parallel_for(ok.size(), [&](std::size_t t) {
    const Measurements noisy = synthesize(signal, M, rep.sigma, derive_seed(seed, t));
    const double sup = (NoiseSpaceCorrelation(noisy.y, S, L).on_grid(G) - r0).cwiseAbs().maxCoeff();
    ok[t] = sup <= epsilon;
  });
  rep.successes = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
  rep.pass_rate = trials > 0 ? static_cast<double>(rep.successes) / trials : 0.0;
  rep.promised = 1.0 - std::pow(M + 2.0, -(nu - 1.0));
  rep.required = rep.promised - 3.0 * std::sqrt(rep.promised * (1.0 - rep.promised) / std::max(trials, 1));
  rep.passed = rep.pass_rate >= rep.required;
  return rep;
}

}  // namespace superres
