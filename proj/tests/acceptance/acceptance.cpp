// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--cli PATH] [criterion ...]
//
// With no criterion names every criterion runs. Exit status is nonzero when any
// selected criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "superres/superres.hpp"

namespace fs = std::filesystem;
using namespace superres;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double smin(const SupportSet& s, int M) { return sigma_extremes(vandermonde(s, M)).min; }

// Clumps placed evenly around the torus. Within a clump consecutive gaps are
// spacing/M, or drawn from [spacing, 1.8 spacing]/M when jitter is set.
std::optional<SupportSet> random_clumps(std::mt19937_64& rng, int M, const std::vector<int>& sizes, double spacing,
                                        bool jitter) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double start = unif(rng);
  const double pitch = 1.0 / sizes.size();
  std::vector<double> pts;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    double w = start + a * pitch;
    for (int l = 0; l < sizes[a]; ++l) {
      pts.push_back(w);
      w += spacing / M * (jitter ? 1.0 + 0.8 * unif(rng) : 1.0);
    }
  }
  SupportSet s(pts);
  if (!decompose_clumps(s, M)) return std::nullopt;
  return s;
}

// ---------------------------------------------------------------------------

Outcome sigma_min_slope() {
  const int M = 4096;
  std::string detail;
  bool pass = true;
  for (int lambda : {2, 3, 4}) {
    const SigmaMinSweep sw = sweep_sigma_min({1}, {lambda}, log_grid(lambda, 8.0, 12), M, 11);
    int below = 0, valid = 0;
    for (const auto& r : sw.rows) {
      if (!r.bound.hypotheses_satisfied) continue;
      ++valid;
      below += r.ratio < 1.0;
    }
    const double slope = sw.fits.at(0).zeta.slope;
    const bool ok = std::abs(slope + (lambda - 1)) <= 0.1 && below == 0 && valid > 0;
    pass = pass && ok;
    detail += fmt("lambda=%d slope=%.4f (target %d) ratio<1 at %d/%d; ", lambda, slope, -(lambda - 1), below, valid);
  }
  return {pass, detail};
}

Outcome bound_soundness() {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pickA(1, 3), pickL(1, 4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int M = 16384;
  int scenes = 0, equi = 0, violations = 0, attempts = 0;
  double worst_equal = 0.0;
  while (scenes < 200 && attempts < 20000) {
    ++attempts;
    const bool equispaced = scenes % 2 == 0;
    std::vector<int> sizes(static_cast<std::size_t>(pickA(rng)));
    int lmax = 1;
    for (int& l : sizes) lmax = std::max(lmax, l = pickL(rng));
    const double spacing = (0.15 + 0.7 * unif(rng)) / std::max(1.8 * (lmax - 1), 1.0);
    auto s = random_clumps(rng, M, sizes, spacing, !equispaced);
    if (!s || s->size() < 2) continue;
    const BoundReport c1 = clump1_lower(*s, M);
    const BoundReport c2 = clump2_lower(*s, M);
    if (!c1.hypotheses_satisfied || !c2.hypotheses_satisfied) continue;
    ++scenes;
    const double sm = smin(*s, M);
    bool ok = c1.value <= sm && c2.value <= sm && c1.value >= c2.value * (1 - 1e-12);
    // equality needs every clump to share the global spacing, which holds when all clumps have >= 2 nodes
    const bool all_pairs = std::all_of(sizes.begin(), sizes.end(), [](int l) { return l >= 2; });
    if (equispaced && all_pairs) {
      ++equi;
      const double rel = std::abs(c1.value - c2.value) / c2.value;
      worst_equal = std::max(worst_equal, rel);
      ok = ok && rel <= 1e-10;
    }
    violations += !ok;
  }

  std::uniform_int_distribution<int> pickM(20, 400), pickLam(2, 4), pickExtra(0, 3);
  int upper_scenes = 0, upper_viol = 0;
  while (upper_scenes < 200) {
    const int Mu = pickM(rng);
    const int lambda = pickLam(rng);
    const double limit = 1.0 / (equispaced_alpha_constant(lambda) * std::sqrt(Mu + 1.0));
    const double alpha = limit * (0.05 + 0.95 * unif(rng));
    std::vector<double> pts;
    const double w0 = unif(rng);
    for (int l = 0; l < lambda; ++l) pts.push_back(w0 + l * alpha / Mu);
    for (int e = pickExtra(rng); e > 0; --e) pts.push_back(w0 + 0.1 + 0.8 * unif(rng));
    SupportSet s;
    try {
      s = SupportSet(pts);
    } catch (const Error&) {
      continue;
    }
    const BoundReport up = upper_equispaced(lambda, alpha, Mu);
    if (!up.hypotheses_satisfied) continue;
    ++upper_scenes;
    upper_viol += !(smin(s, Mu) <= up.value);
  }
  return {violations == 0 && upper_viol == 0 && scenes == 200,
          fmt("%d lower-bound scenes (%d equispaced, max rel gap %.2e), %d violations; %d upper scenes, %d violations",
              scenes, equi, worst_equal, violations, upper_scenes, upper_viol)};
}

Outcome theta_oracle() {
  bool pass = true;
  std::string detail;
  for (auto [M, S, N] : {std::tuple{6, 2, 38}, std::tuple{8, 2, 51}, std::tuple{7, 2, 44}}) {
    const ThetaSearch ts = theta_bruteforce(M, N, S);
    const double lo = theta_lower(M, N, S).value, hi = theta_star(M, N, S);
    const bool ok = lo <= ts.theta && ts.theta <= hi * (1 + 1e-12) && ts.argmin_consecutive(N);
    pass = pass && ok;
    detail += fmt("(%d,%d,%d): %.4g <= %.4g <= %.4g argmin {%d,%d}; ", M, S, N, lo, ts.theta, hi, ts.argmin[0], ts.argmin[1]);
  }
  return {pass, detail};
}

Outcome certificate_suite() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> pickA(1, 3), pickL(1, 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int M = 1024;
  int scenes = 0, violations = 0, attempts = 0;
  double worst_interp = 0.0, worst_off = 0.0, worst_norm = 0.0, worst_dual = 0.0;
  while (scenes < 100 && attempts < 20000) {
    ++attempts;
    std::vector<int> sizes(static_cast<std::size_t>(pickA(rng)));
    int lmax = 1;
    for (int& l : sizes) lmax = std::max(lmax, l = pickL(rng));
    const double spacing = (0.2 + 0.6 * unif(rng)) / std::max(1.8 * (lmax - 1), 1.0);
    auto s = random_clumps(rng, M, sizes, spacing, true);
    if (!s || s->size() < 2) continue;
    if (!clump1_lower(*s, M).hypotheses_satisfied) continue;
    ++scenes;
    const ClumpCertificateCheck c = check_clump_certificates(*s, M);
    const DualityBound d = duality_lower_bound(*s, M, CertificateMode::clump);
    worst_interp = std::max(worst_interp, c.max_interp_error);
    worst_off = std::max(worst_off, c.max_offclump / c.offclump_limit);
    worst_norm = std::max(worst_norm, c.max_norm_ratio);
    worst_dual = std::max(worst_dual, d.value / d.sigma_min);
    violations += !(c.ok(1e-8) && d.value <= d.sigma_min * (1 + 1e-10));
  }

  int grid_scenes = 0, grid_viol = 0;
  std::uniform_int_distribution<int> pickS(2, 3);
  while (grid_scenes < 100) {
    const int S = pickS(rng);
    const int Mg = 2 * S + static_cast<int>(unif(rng) * 10);
    const int N = static_cast<int>(std::ceil(std::numbers::pi * Mg * S)) + static_cast<int>(unif(rng) * 40);
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < S) {
      const int n = static_cast<int>(unif(rng) * N);
      if (std::find(idx.begin(), idx.end(), n) == idx.end()) idx.push_back(n);
    }
    std::sort(idx.begin(), idx.end());
    const SupportSet s = grid_support(idx, N);
    ++grid_scenes;
    const GridCertificateCheck g = check_grid_certificates(s, Mg, N);
    const DualityBound d = duality_lower_bound(s, Mg, CertificateMode::grid, N);
    grid_viol += !(g.hypotheses && g.ok(1e-8) && d.value <= d.sigma_min * (1 + 1e-10));
  }

  const int Me = 8, Ne = 51, Se = 2;
  const double estar = E_star(Me, Ne, Se);
  int e_count = 0, e_viol = 0;
  for_each_subset(Ne, Se, [&](const std::vector<int>& idx) {
    ++e_count;
    e_viol += !(evaluate_E(grid_support(idx, Ne), Me, Ne) <= estar * (1 + 1e-12));
  });

  return {violations == 0 && grid_viol == 0 && e_viol == 0 && scenes == 100,
          fmt("%d clump scenes: max interp %.2e, max offclump/limit %.3f, max norm ratio %.3f, max duality/sigma_min "
              "%.3f, %d violations; %d grid scenes, %d violations; E enumeration %d subsets, %d violations",
              scenes, worst_interp, worst_off, worst_norm, worst_dual, violations, grid_scenes, grid_viol, e_count, e_viol)};
}

Outcome minmax_sandwich() {
  const SandwichReport r = demanet_sandwich_check(6, 12, 1, 0.1, 50, 41);
  return {r.violations == 0 && r.trials == 50,
          fmt("Theta(6,12,2)=%.4g, max error %.4g <= 2delta/Theta=%.4g, %d violations; adversarial %.4g >= %.4g",
              r.theta_2s, r.max_error, r.upper, r.violations, r.adversarial_error, r.lower)};
}

Outcome music_exactness(int count = 100) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> pickM(8, 80);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int failures = 0;
  double worst = 0.0;
  for (int scene = 0; scene < count; ++scene) {
    const int M = pickM(rng);
    const int S = 1 + static_cast<int>(unif(rng) * std::min((M + 1) / 2, 6));
    const int G = 16 * M;
    // Nodes one cell apart cannot both be strict local maxima of any grid sampling,
    // so distinct nodes are kept at least two cells apart (1/(8M), far below 1/M).
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < S) {
      const int g = static_cast<int>(unif(rng) * G);
      if (std::none_of(idx.begin(), idx.end(), [&](int h) { return std::min((g - h + G) % G, (h - g + G) % G) < 2; }))
        idx.push_back(g);
    }
    std::vector<double> pts;
    for (int g : idx) pts.push_back(static_cast<double>(g) / G);
    const SupportSet s(pts);
    CVector x(S);
    for (int j = 0; j < S; ++j) x(j) = (0.5 + unif(rng)) * unit_phasor(unif(rng));
    // ceil(M/2) keeps both pencil dimensions >= S whenever M+1 >= 2S
    const MusicResult r = recover(synthesize(SpikeSignal(s, x), M, 0.0, 0), MusicConfig{S, (M + 1) / 2});
    const double d = bottleneck_distance(s, r.recovered);
    worst = std::max(worst, d);
    failures += d != 0.0;
  }
  return {failures == 0, fmt("%d scenes, %d with dist_B > 0 (max %.3g)", count, failures, worst)};
}

Outcome perturbation_bound() {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int held = 0, violations = 0, trials = 0;
  double worst = 0.0;
  for (int scene = 0; scene < 10; ++scene) {
    const int M = 20 + 6 * scene;
    const int L = M / 2;
    const int S = 1 + scene % 4;
    std::vector<double> pts;
    const double w0 = unif(rng);
    for (int j = 0; j < S; ++j) pts.push_back(w0 + j * (0.5 + unif(rng)) / M * 2.0);
    const SupportSet s(pts);
    CVector x(S);
    for (int j = 0; j < S; ++j) x(j) = (0.5 + unif(rng)) * unit_phasor(unif(rng));
    const SpikeSignal sig(s, x);
    const double denom = sig.x_min() * smin(s, L) * smin(s, M - L);
    const double sigma = (0.1 + 2.9 * unif(rng)) * denom / (2.0 * hankel_noise_bound(M, L, 1.0).mean_bound);
    const PerturbationReport rep = perturbation_check(sig, M, L, sigma, 50, derive_seed(61, scene));
    trials += rep.trials;
    held += rep.precondition_held;
    violations += rep.violations;
    worst = std::max(worst, rep.max_ratio);
  }
  return {violations == 0 && trials == 500 && held > 0,
          fmt("%d trials, precondition held in %d, %d violations, max lhs/rhs %.4f", trials, held, violations, worst)};
}

Outcome hankel_norm() {
  const int M = 100, L = 50;
  const auto norms = sample_hankel_noise_norms(M, L, 1.0, 500, 71);
  const HankelNoiseBound b = hankel_noise_bound(M, L, 1.0);
  double mean = 0.0;
  int above = 0;
  const double t = 1.5 * b.mean_bound;
  for (double v : norms) {
    mean += v;
    above += v >= t;
  }
  mean /= norms.size();
  const double frac = static_cast<double>(above) / norms.size();
  return {mean <= b.mean_bound && frac <= b.tail(t),
          fmt("mean %.4f <= %.4f; P(norm >= %.3f) = %.4f <= %.4g", mean, b.mean_bound, t, frac, b.tail(t))};
}

Outcome phase_transition_exponent() {
  bool pass = true;
  std::string detail;
  for (auto [lambda, target, tol] : {std::tuple{2, 3.00, 0.6}, std::tuple{3, 5.19, 0.8}}) {
    PhaseTransitionConfig cfg;
    cfg.A = 1;
    cfg.lambda = lambda;
    cfg.M = 100;
    cfg.trials = 10;
    cfg.seed = 7;
    const PhaseTransition pt = phase_transition(cfg);
    const bool ok = pt.fit && std::abs(pt.q - target) <= tol;
    pass = pass && ok;
    detail += fmt("lambda=%d q=%.4f (target %.2f +- %.1f, %zu thresholds, r2 %.3f); ", lambda, pt.q, target, tol,
                  pt.fit ? pt.fit->points : 0, pt.fit ? pt.fit->r2 : 0.0);
  }
  return {pass, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli path given"};
  const fs::path root = fs::temp_directory_path() / ("superres_determinism_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"bounds", "bounds --theorem clump2 --A 1 --lambda 2 --alpha 0.25 --M 100"},
      {"sigma_min", "sweep-sigma-min --seed 3"},
      {"theta", "sweep-theta"},
      {"music_demo", "music-demo --seed 5 --sigma 0.003"},
      {"phase", "phase-transition --A 1 --lambda 2 --trials 10 --seed 7 --srf-points 5 --sigma-per-decade 4"},
      {"certify", "certify --nodes 0.2 0.2008 0.7 --M 400"},
      {"selftest", "selftest --seed 2"},
  };
  int mismatches = 0, files = 0;
  std::string detail;
  for (const auto& [tag, args] : runs) {
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / tag / std::to_string(rep);
      // the second run is serial so that scheduling differences would show up
      const std::string env = rep == 1 ? "SUPERRES_THREADS=1 " : "";
      const std::string cmd = env + "\"" + cli + "\" " + args + " --out \"" + out.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) {
        detail += tag + " exited " + std::to_string(rc) + "; ";
        ++mismatches;
      }
    }
    for (const auto& entry : fs::directory_iterator(root / tag / "0")) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const auto other = root / tag / "1" / entry.path().filename();
      if (slurp(entry.path()) != slurp(other) || slurp(entry.path()).empty()) {
        ++mismatches;
        detail += tag + "/" + entry.path().filename().string() + " differs; ";
      }
    }
  }
  fs::remove_all(root);
  return {mismatches == 0, fmt("%zu commands, %d csv files compared, %d mismatches. ", runs.size(), files, mismatches) + detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) cli = argv[++i];
    else wanted.push_back(a);
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sigma_min_slope", sigma_min_slope},
      {"bound_soundness", bound_soundness},
      {"theta_oracle", theta_oracle},
      {"certificate_suite", certificate_suite},
      {"minmax_sandwich", minmax_sandwich},
      {"music_exactness", [] { return music_exactness(); }},
      {"perturbation_bound", perturbation_bound},
      {"hankel_noise_norm", hankel_norm},
      {"phase_transition_exponent", phase_transition_exponent},
      {"determinism", [&] { return determinism(cli); }},
  };

  int failed = 0, ran = 0;
  for (const auto& name : wanted) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
      std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
      return 64;
    }
  }
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), dt, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 && ran > 0 ? 0 : 1;
}
