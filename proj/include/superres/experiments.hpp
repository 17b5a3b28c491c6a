#pragma once

// Scene generators and sweep drivers: sigma_min scaling of clumped nodes,
// the Theta ratio on a grid, and MUSIC phase transitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "superres/bounds.hpp"
#include "superres/error.hpp"
#include "superres/music.hpp"
#include "superres/parallel.hpp"
#include "superres/torus.hpp"
#include "superres/vandermonde.hpp"

namespace superres {

// ---------------------------------------------------------------------------
// Fitting and grids.

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  std::size_t points = 0;
};

/// Ordinary least squares of ys on xs.
inline LinearFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::invalid_argument, "fit_slope needs equal-length inputs");
  const std::size_t n = xs.size();
  if (n < 2) throw Error(ErrorCode::singular_fit, "need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double scale = std::max(1.0, std::abs(mx));
  if (!(sxx > 1e-24 * scale * scale * n)) throw Error(ErrorCode::singular_fit, "xs are not distinct");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

/// n points log-spaced from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi >= lo) || n < 1) throw Error(ErrorCode::invalid_argument, "log_grid needs 0 < lo <= hi, n >= 1");
  std::vector<double> out;
  if (n == 1) return {lo};
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
  out.back() = hi;
  return out;
}

/// Points per decade from lo to hi, anchored at exact powers of ten.
inline std::vector<double> log_grid_per_decade(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi >= lo) || per_decade < 1) throw Error(ErrorCode::invalid_argument, "bad decade grid");
  const double a = std::log10(lo), b = std::log10(hi);
  const int n = static_cast<int>(std::lround((b - a) * per_decade)) + 1;
  return log_grid(lo, hi, std::max(n, 1));
}

// ---------------------------------------------------------------------------
// Scenes.

struct ClumpSceneConfig {
  int A = 1;
  int lambda = 2;
  double alpha = 0.5;           // intra-clump spacing alpha/M
  std::optional<double> beta;   // inter-clump gap beta/M
  int M = 100;
  std::uint64_t seed = 0;

  int S() const { return A * lambda; }
  double default_beta() const { return 20.0 * std::sqrt(double(S())) * std::pow(lambda, 2.5) / std::sqrt(alpha); }
  double gap() const { return beta.value_or(default_beta()); }
};

/// A clumps of lambda nodes spaced alpha/M, consecutive clumps gap/M apart,
/// starting at a seeded offset. Amplitudes have unit modulus and random phase.
inline SpikeSignal generate_clump_scene(const ClumpSceneConfig& cfg) {
  if (cfg.A < 1 || cfg.lambda < 1 || cfg.M < 1 || !(cfg.alpha > 0.0) || !(cfg.gap() > 0.0))
    throw Error(ErrorCode::invalid_argument, "clump scene needs A, lambda, M >= 1 and alpha, beta > 0");
  const double span = (cfg.lambda - 1) * cfg.alpha / cfg.M;
  const double pitch = span + cfg.gap() / cfg.M;
  // The wrap-around gap from the last clump back to the first must also be at least beta/M.
  const double used = cfg.A > 1 ? cfg.A * pitch : span;
  if (!(used < 1.0))
    throw Error(ErrorCode::scene_overflow, "A=" + std::to_string(cfg.A) + " lambda=" + std::to_string(cfg.lambda) +
                                               " clumps do not fit on the torus at M=" + std::to_string(cfg.M));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double start = unif(rng);
  std::vector<double> pts;
  for (int a = 0; a < cfg.A; ++a)
    for (int l = 0; l < cfg.lambda; ++l) pts.push_back(start + a * pitch + l * cfg.alpha / cfg.M);
  CVector x(cfg.S());
  for (int j = 0; j < cfg.S(); ++j) x(j) = unit_phasor(unif(rng));
  // SupportSet sorts its nodes; the amplitudes are i.i.d., so their order is immaterial.
  return SpikeSignal(SupportSet(pts), x);
}

inline std::string hypothesis_string(const BoundReport& r) {
  std::string out;
  char buf[64];
  for (const auto& h : r.hypothesis_log) {
    if (!out.empty()) out += ';';
    out += h.label;
    std::snprintf(buf, sizeof buf, ":%.17g", h.lhs);
    out += buf;
    out += h.relation;
    std::snprintf(buf, sizeof buf, "%.17g:", h.rhs);
    out += buf;
    out += h.holds ? "ok" : "fail";
  }
  return out;
}

// ---------------------------------------------------------------------------
// sigma_min sweep.

struct SigmaMinRow {
  int A = 0, lambda = 0, M = 0;
  double srf = 0.0, alpha = 0.0, beta = 0.0;
  double zeta = 0.0;  // measured sigma_min
  double xi = 0.0;    // clump lower bound
  double ratio = 0.0;
  bool below_floor = false;
  BoundReport bound;
};

struct SigmaMinFit {
  int A = 0, lambda = 0;
  LinearFit zeta;   // log zeta vs log SRF
  LinearFit ratio;  // log(zeta/xi) vs log SRF
};

struct SigmaMinSweep {
  std::vector<SigmaMinRow> rows;
  std::vector<SigmaMinFit> fits;
};

/// For each (A, lambda) and each SRF in the list, measures sigma_min of the
/// clump scene with alpha = 1/SRF and evaluates the clump lower bound.
inline SigmaMinSweep sweep_sigma_min(const std::vector<int>& As, const std::vector<int>& lambdas,
                                     const std::vector<double>& srfs, int M, std::uint64_t seed,
                                     std::optional<double> beta = std::nullopt) {
  struct Cell {
    int A, lambda;
    double srf;
  };
  std::vector<Cell> cells;
  for (int A : As)
    for (int l : lambdas)
      for (double s : srfs) cells.push_back({A, l, s});

  SigmaMinSweep out;
  out.rows.resize(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    ClumpSceneConfig cfg{c.A, c.lambda, 1.0 / c.srf, beta, M, derive_seed(seed, i)};
    const SpikeSignal sig = generate_clump_scene(cfg);
    SigmaMinRow& row = out.rows[i];
    row.A = c.A;
    row.lambda = c.lambda;
    row.M = M;
    row.srf = c.srf;
    row.alpha = cfg.alpha;
    row.beta = cfg.gap();
    const SigmaExtremes ext = sigma_extremes(vandermonde(sig.support(), M));
    row.zeta = ext.min;
    row.below_floor = ext.below_numerical_floor;
    row.bound = clump2_lower(std::vector<int>(static_cast<std::size_t>(c.A), c.lambda), cfg.alpha, M,
                             c.A > 1 ? std::optional<double>(decompose_clumps(sig.support(), M)->min_interclump_dist)
                                     : std::nullopt);
    row.xi = row.bound.value;
    row.ratio = row.zeta / row.xi;
  });

  for (int A : As) {
    for (int l : lambdas) {
      std::vector<double> x, yz, yr;
      for (const auto& r : out.rows) {
        if (r.A != A || r.lambda != l || r.below_floor) continue;
        x.push_back(std::log10(r.srf));
        yz.push_back(std::log10(r.zeta));
        yr.push_back(std::log10(r.ratio));
      }
      if (x.size() < 2) continue;
      out.fits.push_back({A, l, fit_slope(x, yz), fit_slope(x, yr)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Theta sweep.

struct ThetaRow {
  int S = 0, M = 0, N = 0;
  double srf = 0.0;
  double theta = 0.0;       // closed-form lower bound
  double theta_star = 0.0;  // sigma_min on S consecutive grid nodes
  double ratio = 0.0;
  BoundReport bound;
};

struct ThetaFit {
  int S = 0;
  LinearFit theta_star;  // over SRF >= 2
  std::optional<LinearFit> ratio;  // over SRF >= pi S
};

struct ThetaSweep {
  std::vector<ThetaRow> rows;
  std::vector<ThetaFit> fits;
};

inline ThetaSweep sweep_theta(const std::vector<int>& Ss, const std::vector<double>& srfs, int M) {
  ThetaSweep out;
  for (int S : Ss) {
    for (double srf : srfs) {
      ThetaRow r;
      r.S = S;
      r.M = M;
      r.N = static_cast<int>(std::lround(srf * M));
      r.srf = static_cast<double>(r.N) / M;
      r.bound = theta_lower(M, r.N, S);
      r.theta = r.bound.value;
      r.theta_star = theta_star(M, r.N, S);
      r.ratio = r.theta_star / r.theta;
      out.rows.push_back(std::move(r));
    }
  }
  for (int S : Ss) {
    std::vector<double> x, y, xr, yr;
    for (const auto& r : out.rows) {
      if (r.S != S) continue;
      if (r.srf >= 2.0) {
        x.push_back(std::log10(r.srf));
        y.push_back(std::log10(r.theta_star));
      }
      if (r.srf >= std::numbers::pi * S) {
        xr.push_back(std::log10(r.srf));
        yr.push_back(std::log10(r.ratio));
      }
    }
    if (x.size() < 2) continue;
    ThetaFit f;
    f.S = S;
    f.theta_star = fit_slope(x, y);
    if (xr.size() >= 2) f.ratio = fit_slope(xr, yr);
    out.fits.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MUSIC phase transition.

struct PhaseTransitionConfig {
  int A = 1;
  int lambda = 2;
  int M = 100;
  double beta = 10.0;  // clump gap beta/M
  std::vector<double> srfs = log_grid(1.0, 10.0, 20);
  std::vector<double> sigmas = log_grid_per_decade(1e-6, 1.0, 30);
  int trials = 10;
  std::uint64_t seed = 0;
  bool refine = true;
  int cells_per_delta = 8;  // imaging grid is refined so that Delta spans at least this many cells

  int grid_for(double srf) const {
    return std::max(16 * M, static_cast<int>(std::ceil(cells_per_delta * srf * M)));
  }
};

struct PhaseCell {
  double srf = 0.0, sigma = 0.0, delta = 0.0;
  double mean_log2_ratio = 0.0;  // mean over trials of log2(dist_B / Delta)
  double mean_dist = 0.0;
  int degenerate_trials = 0;
  bool success = false;  // mean dist_B < Delta/2
};

struct PhaseThreshold {
  double srf = 0.0;
  std::optional<double> sigma_star;
  bool censored = false;  // every sigma on the grid succeeded
};

struct PhaseTransition {
  std::vector<PhaseCell> cells;  // SRF-major, sigma ascending
  std::vector<PhaseThreshold> thresholds;
  std::optional<LinearFit> fit;  // log10 sigma* vs log10 SRF
  double q = std::numeric_limits<double>::quiet_NaN();
};

/// sigma*(SRF): the largest grid sigma such that every sigma up to it succeeds.
inline PhaseThreshold extract_threshold(double srf, const std::vector<double>& sigmas, const std::vector<bool>& success) {
  PhaseThreshold t;
  t.srf = srf;
  std::size_t k = 0;
  while (k < success.size() && success[k]) ++k;
  if (k > 0) t.sigma_star = sigmas[k - 1];
  t.censored = k == success.size();
  return t;
}

/// Fits log10 sigma* against log10 SRF over thresholds that are neither missing nor censored.
inline std::optional<LinearFit> fit_thresholds(const std::vector<PhaseThreshold>& ts) {
  std::vector<double> x, y;
  for (const auto& t : ts) {
    if (!t.sigma_star || t.censored) continue;
    x.push_back(std::log10(t.srf));
    y.push_back(std::log10(*t.sigma_star));
  }
  if (x.size() < 2) return std::nullopt;
  return fit_slope(x, y);
}

/// Scenes and noise directions are drawn once per (SRF, trial) and reused for
/// every sigma, so rows differ only in the noise scale.
inline PhaseTransition phase_transition(const PhaseTransitionConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be positive");
  if (cfg.srfs.empty() || cfg.sigmas.empty()) throw Error(ErrorCode::invalid_argument, "empty grid");
  if (!std::is_sorted(cfg.sigmas.begin(), cfg.sigmas.end()))
    throw Error(ErrorCode::invalid_argument, "sigma grid must be ascending");
  if (cfg.beta < 10.0) throw Error(ErrorCode::hypothesis_violation, "clump gap must be at least 10/M");
  const int S = cfg.A * cfg.lambda;
  for (double srf : cfg.srfs)
    if (!(srf > 0.0)) throw Error(ErrorCode::invalid_argument, "SRF must be positive");

  const std::size_t nsrf = cfg.srfs.size(), nsig = cfg.sigmas.size(), nt = static_cast<std::size_t>(cfg.trials);
  std::vector<double> dist(nsrf * nsig * nt);
  std::vector<char> degenerate(dist.size(), 0);

  // One task per (SRF, trial): the scene is built once and swept over sigma.
  parallel_for(nsrf * nt, [&](std::size_t task) {
    const std::size_t i = task / nt, t = task % nt;
    const std::uint64_t cell_seed = derive_seed(derive_seed(cfg.seed, i), t);
    ClumpSceneConfig sc{cfg.A, cfg.lambda, 1.0 / cfg.srfs[i], cfg.beta, cfg.M, cell_seed};
    const SpikeSignal sig = generate_clump_scene(sc);
    const std::uint64_t noise_seed = derive_seed(cell_seed, 0);
    const MusicConfig music{S, std::nullopt, cfg.grid_for(cfg.srfs[i]), cfg.refine};
    for (std::size_t k = 0; k < nsig; ++k) {
      const MusicResult r = recover(synthesize(sig, cfg.M, cfg.sigmas[k], noise_seed), music);
      const std::size_t slot = (i * nsig + k) * nt + t;
      dist[slot] = bottleneck_distance(sig.support(), r.recovered);
      degenerate[slot] = r.degenerate;
    }
  });

  PhaseTransition out;
  for (std::size_t i = 0; i < nsrf; ++i) {
    const double delta = 1.0 / (cfg.srfs[i] * cfg.M);
    std::vector<bool> ok;
    for (std::size_t k = 0; k < nsig; ++k) {
      PhaseCell c;
      c.srf = cfg.srfs[i];
      c.sigma = cfg.sigmas[k];
      c.delta = delta;
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t slot = (i * nsig + k) * nt + t;
        c.mean_dist += dist[slot];
        c.mean_log2_ratio += std::log2(std::max(dist[slot] / delta, 1e-12));
        c.degenerate_trials += degenerate[slot];
      }
      c.mean_dist /= nt;
      c.mean_log2_ratio /= nt;
      c.success = c.mean_dist < delta / 2 && c.degenerate_trials == 0;
      ok.push_back(c.success);
      out.cells.push_back(c);
    }
    out.thresholds.push_back(extract_threshold(cfg.srfs[i], cfg.sigmas, ok));
  }
  out.fit = fit_thresholds(out.thresholds);
  if (out.fit) out.q = -out.fit->slope;
  return out;
}

}  // namespace superres
