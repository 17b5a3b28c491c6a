// superres_cli: bound evaluation, sweeps, MUSIC demos and self-checks.
// Every subcommand writes <out>/records.csv and <out>/manifest.json.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "superres/superres.hpp"

namespace fs = std::filesystem;
using namespace superres;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitUsage = 64;

struct Output {
  std::string dir;
  std::uint64_t seed = 0;
};

void add_output(CLI::App* app, Output& out, const std::string& name, bool with_seed) {
  out.dir = "runs/" + name;
  app->add_option("--out", out.dir, "Output directory")->capture_default_str();
  if (with_seed) app->add_option("--seed", out.seed, "Base seed")->capture_default_str();
}

fs::path prepare(const Output& out) {
  fs::path dir(out.dir);
  fs::create_directories(dir);
  return dir;
}

std::string inputs_string(const BoundReport& r) {
  std::string s;
  for (const auto& [k, v] : r.inputs) s += (s.empty() ? "" : ";") + k + "=" + format_double(v);
  return s;
}

void print_report(const BoundReport& r) {
  std::printf("%s = %.17g\n", r.name.c_str(), r.value);
  for (const auto& h : r.hypothesis_log)
    std::printf("  [%s] %s: %.6g %s %.6g\n", h.holds ? "ok" : "FAIL", h.label.c_str(), h.lhs, h.relation.c_str(), h.rhs);
}

nlohmann::json fit_json(const LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}

// ---------------------------------------------------------------------------

struct BoundsArgs {
  Output out;
  std::string theorem;
  int A = 1;
  std::vector<int> lambda{2};
  double alpha = 0.25;
  int M = 100;
  int N = 0;
  int S = 2;
  int L = 0;
  double delta = 0.1;
  double nu = 2.0;
  double epsilon = 0.1;
  double sigma = 1.0;
  std::optional<double> dist;
  std::optional<double> t;
  std::vector<double> nodes;
};

int run_bounds(const BoundsArgs& a, RunManifest& m) {
  std::vector<int> lambdas = a.lambda;
  if (lambdas.size() == 1) lambdas.assign(static_cast<std::size_t>(a.A), a.lambda.front());
  std::vector<BoundReport> reports;
  const auto& th = a.theorem;
  if (th == "clump1") {
    if (a.nodes.empty()) throw Error(ErrorCode::invalid_argument, "clump1 needs --nodes");
    reports.push_back(clump1_lower(SupportSet(a.nodes), a.M));
  } else if (th == "clump2") {
    reports.push_back(a.nodes.empty() ? clump2_lower(lambdas, a.alpha, a.M, a.dist) : clump2_lower(SupportSet(a.nodes), a.M));
  } else if (th == "upper-equispaced") {
    reports.push_back(upper_equispaced(a.lambda.front(), a.alpha, a.M));
  } else if (th == "theta") {
    reports.push_back(theta_lower(a.M, a.N, a.S));
  } else if (th == "minmax") {
    const MinMaxBounds b = minmax_bounds(a.M, a.N, a.S, a.delta);
    reports.push_back(b.lower);
    reports.push_back(b.upper);
  } else if (th == "music-tolerance") {
    reports.push_back(music_noise_tolerance(lambdas, a.alpha, a.M, a.nu, a.epsilon, a.dist));
  } else if (th == "hankel-noise") {
    const int L = a.L > 0 ? a.L : a.M / 2;
    const HankelNoiseBound h = hankel_noise_bound(a.M, L, a.sigma);
    BoundReport r;
    r.name = "hankel_noise_mean";
    r.input("M", a.M);
    r.input("L", L);
    r.input("sigma", a.sigma);
    r.value = h.mean_bound;
    reports.push_back(r);
    if (a.t) {
      BoundReport tail;
      tail.name = "hankel_noise_tail";
      tail.inputs = r.inputs;
      tail.input("t", *a.t);
      tail.value = h.tail(*a.t);
      reports.push_back(tail);
    }
  } else if (th == "constant-B" || th == "constant-C") {
    BoundReport r;
    r.name = th == "constant-B" ? "B" : "C";
    r.input("lambda", a.lambda.front());
    r.input("M", a.M);
    r.value = th == "constant-B" ? constant_B(a.lambda.front(), a.M) : constant_C(a.lambda.front(), a.M);
    reports.push_back(r);
  } else {
    reports.push_back({});
    reports.back().name = "theta_constant";
    reports.back().input("M", a.M);
    reports.back().input("S", a.S);
    reports.back().value = theta_constant(a.M, a.S);
  }

  CsvTable t({"bound", "value", "hypotheses_satisfied", "hypotheses", "inputs"});
  bool ok = true;
  for (const auto& r : reports) {
    print_report(r);
    t.add({r.name, r.value, r.hypotheses_satisfied, hypothesis_string(r), inputs_string(r)});
    ok = ok && r.hypotheses_satisfied;
    m.summary[r.name] = r.value;
  }
  t.write(prepare(a.out) / "records.csv");
  return ok ? kExitOk : kExitHypothesis;
}

// ---------------------------------------------------------------------------

struct SigmaMinArgs {
  Output out;
  std::vector<int> A{1};
  std::vector<int> lambda{2, 3, 4};
  double srf_max = 8.0;
  int srf_points = 12;
  int M = 4096;
  std::optional<double> beta;
};

int run_sigma_min(const SigmaMinArgs& a, RunManifest& m) {
  CsvTable rows({"A", "lambda", "M", "srf", "alpha", "beta", "zeta", "xi", "ratio", "below_floor", "hypotheses_satisfied",
                 "hypotheses"});
  CsvTable fits({"A", "lambda", "zeta_slope", "zeta_intercept", "zeta_r2", "ratio_slope", "points"});
  bool any_valid = false;
  m.summary["fits"] = nlohmann::json::array();
  for (int l : a.lambda) {
    const SigmaMinSweep sw =
        sweep_sigma_min(a.A, {l}, log_grid(static_cast<double>(l), a.srf_max, a.srf_points), a.M, derive_seed(a.out.seed, l), a.beta);
    for (const auto& r : sw.rows) {
      rows.add({std::int64_t(r.A), std::int64_t(r.lambda), std::int64_t(r.M), r.srf, r.alpha, r.beta, r.zeta, r.xi, r.ratio,
                r.below_floor, r.bound.hypotheses_satisfied, hypothesis_string(r.bound)});
      any_valid = any_valid || r.bound.hypotheses_satisfied;
    }
    for (const auto& f : sw.fits) {
      fits.add({std::int64_t(f.A), std::int64_t(f.lambda), f.zeta.slope, f.zeta.intercept, f.zeta.r2, f.ratio.slope,
                std::int64_t(f.zeta.points)});
      std::printf("A=%d lambda=%d slope(log zeta)=%.4f slope(log ratio)=%.4f\n", f.A, f.lambda, f.zeta.slope, f.ratio.slope);
      m.summary["fits"].push_back({{"A", f.A}, {"lambda", f.lambda}, {"zeta", fit_json(f.zeta)}, {"ratio", fit_json(f.ratio)}});
    }
  }
  const fs::path dir = prepare(a.out);
  rows.write(dir / "records.csv");
  fits.write(dir / "fits.csv");
  m.outputs.push_back("fits.csv");
  return any_valid ? kExitOk : kExitHypothesis;
}

// ---------------------------------------------------------------------------

struct ThetaArgs {
  Output out;
  std::vector<int> S{2, 3, 4, 5};
  double srf_min = 2.0;
  double srf_max = 20.0;
  int srf_points = 19;
  int M = 32;
};

int run_theta(const ThetaArgs& a, RunManifest& m) {
  const ThetaSweep sw = sweep_theta(a.S, log_grid(a.srf_min, a.srf_max, a.srf_points), a.M);
  CsvTable rows({"S", "M", "N", "srf", "theta", "theta_star", "ratio", "hypotheses_satisfied", "hypotheses"});
  bool any_valid = false;
  for (const auto& r : sw.rows) {
    rows.add({std::int64_t(r.S), std::int64_t(r.M), std::int64_t(r.N), r.srf, r.theta, r.theta_star, r.ratio,
              r.bound.hypotheses_satisfied, hypothesis_string(r.bound)});
    any_valid = any_valid || r.bound.hypotheses_satisfied;
  }
  CsvTable fits({"S", "theta_star_slope", "theta_star_r2", "ratio_slope", "points"});
  m.summary["fits"] = nlohmann::json::array();
  for (const auto& f : sw.fits) {
    const double rs = f.ratio ? f.ratio->slope : std::numeric_limits<double>::quiet_NaN();
    fits.add({std::int64_t(f.S), f.theta_star.slope, f.theta_star.r2, rs, std::int64_t(f.theta_star.points)});
    std::printf("S=%d slope(log theta*)=%.4f slope(log ratio)=%.4f\n", f.S, f.theta_star.slope, rs);
    nlohmann::json j{{"S", f.S}, {"theta_star", fit_json(f.theta_star)}};
    if (f.ratio) j["ratio"] = fit_json(*f.ratio);
    m.summary["fits"].push_back(j);
  }
  const fs::path dir = prepare(a.out);
  rows.write(dir / "records.csv");
  fits.write(dir / "fits.csv");
  m.outputs.push_back("fits.csv");
  return any_valid ? kExitOk : kExitHypothesis;
}

// ---------------------------------------------------------------------------

struct MusicDemoArgs {
  Output out;
  int M = 100;
  std::vector<double> nodes{0.495, 0.5, 0.505};
  double sigma = 0.001;
  int L = 0;
  int grid = 0;
  bool refine = false;
};

int run_music_demo(const MusicDemoArgs& a, RunManifest& m) {
  const SupportSet omega(a.nodes);
  std::mt19937_64 rng(a.out.seed);
  std::uniform_real_distribution<double> phase(0.0, 1.0);
  CVector x(static_cast<Eigen::Index>(omega.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = unit_phasor(phase(rng));
  const SpikeSignal signal(omega, x);
  MusicConfig cfg{static_cast<int>(omega.size())};
  if (a.L > 0) cfg.L = a.L;
  if (a.grid > 0) cfg.grid_size = a.grid;
  cfg.refine = a.refine;
  const MusicResult r = recover(synthesize(signal, a.M, a.sigma, derive_seed(a.out.seed, 1)), cfg);

  CsvTable rows({"g", "omega", "correlation", "imaging", "peak"});
  std::vector<bool> is_peak(static_cast<std::size_t>(r.grid_size), false);
  for (int g : r.peak_indices) is_peak[static_cast<std::size_t>(g)] = true;
  for (int g = 0; g < r.grid_size; ++g)
    rows.add({std::int64_t(g), static_cast<double>(g) / r.grid_size, r.correlation_samples(g), r.imaging_samples(g),
              bool(is_peak[static_cast<std::size_t>(g)])});
  CsvTable nodes({"kind", "omega"});
  for (double w : omega) nodes.add({std::string("true"), w});
  for (double w : r.recovered) nodes.add({std::string("recovered"), w});

  const double dist = bottleneck_distance(omega, r.recovered);
  const double delta = omega.size() > 1 ? min_separation(omega) : 1.0;
  std::printf("dist_B = %.6g, Delta/2 = %.6g, %s%s\n", dist, delta / 2, dist < delta / 2 ? "resolved" : "not resolved",
              r.degenerate ? " (degenerate)" : "");
  m.summary = {{"dist_B", dist}, {"delta", delta}, {"resolved", dist < delta / 2}, {"degenerate", r.degenerate},
               {"gap", r.gap}, {"grid_size", r.grid_size}};
  const fs::path dir = prepare(a.out);
  rows.write(dir / "records.csv");
  nodes.write(dir / "nodes.csv");
  m.outputs.push_back("nodes.csv");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PhaseArgs {
  Output out;
  int A = 1;
  int lambda = 2;
  int M = 100;
  double beta = 10.0;
  int trials = 10;
  double srf_min = 1.0, srf_max = 10.0;
  int srf_points = 20;
  double sigma_min = 1e-6, sigma_max = 1.0;
  int sigma_per_decade = 30;
  bool no_refine = false;
};

int run_phase(const PhaseArgs& a, RunManifest& m) {
  PhaseTransitionConfig cfg;
  cfg.A = a.A;
  cfg.lambda = a.lambda;
  cfg.M = a.M;
  cfg.beta = a.beta;
  cfg.trials = a.trials;
  cfg.seed = a.out.seed;
  cfg.refine = !a.no_refine;
  cfg.srfs = log_grid(a.srf_min, a.srf_max, a.srf_points);
  cfg.sigmas = log_grid_per_decade(a.sigma_min, a.sigma_max, a.sigma_per_decade);
  const PhaseTransition pt = phase_transition(cfg);

  CsvTable rows({"srf", "sigma", "delta", "mean_log2_ratio", "mean_dist", "degenerate_trials", "success"});
  for (const auto& c : pt.cells)
    rows.add({c.srf, c.sigma, c.delta, c.mean_log2_ratio, c.mean_dist, std::int64_t(c.degenerate_trials), c.success});
  CsvTable th({"srf", "sigma_star", "censored", "used_in_fit"});
  for (const auto& t : pt.thresholds)
    th.add({t.srf, t.sigma_star.value_or(std::numeric_limits<double>::quiet_NaN()), t.censored,
            t.sigma_star.has_value() && !t.censored});
  if (pt.fit) {
    std::printf("q = %.4f (r2 = %.4f, %zu thresholds)\n", pt.q, pt.fit->r2, pt.fit->points);
    m.summary = {{"q", pt.q}, {"fit", fit_json(*pt.fit)}};
  } else {
    std::printf("q undetermined: fewer than two usable thresholds\n");
    m.summary = {{"q", nullptr}};
  }
  const fs::path dir = prepare(a.out);
  rows.write(dir / "records.csv");
  th.write(dir / "thresholds.csv");
  m.outputs.push_back("thresholds.csv");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CertifyArgs {
  Output out;
  std::vector<double> nodes;
  int M = 0;
  int N = 0;
};

int run_certify(const CertifyArgs& a, RunManifest& m) {
  const SupportSet omega(a.nodes);
  CsvTable rows({"check", "value", "limit", "ok"});
  bool ok = true, hypotheses = true;
  auto add = [&](const std::string& name, double v, double limit, bool pass) {
    rows.add({name, v, limit, pass});
    std::printf("  [%s] %s: %.6g (limit %.6g)\n", pass ? "ok" : "FAIL", name.c_str(), v, limit);
    ok = ok && pass;
  };

  const ClumpCertificateCheck c = check_clump_certificates(omega, a.M);
  add("clump_interp_error", c.max_interp_error, 1e-8, c.max_interp_error <= 1e-8);
  add("clump_degree", c.max_degree, c.degree_limit, c.max_degree <= c.degree_limit);
  add("clump_norm_ratio", c.max_norm_ratio, 1.0, c.max_norm_ratio <= 1.0 + 1e-12);
  if (c.sep1_holds) add("clump_offclump", c.max_offclump, c.offclump_limit, c.max_offclump <= c.offclump_limit);
  else {
    rows.add({std::string("clump_offclump"), c.max_offclump, c.offclump_limit, c.max_offclump <= c.offclump_limit});
    std::printf("  [skip] clump_offclump: clumps are closer than the separation hypothesis allows\n");
  }
  hypotheses = hypotheses && c.sep1_holds;
  const DualityBound d = duality_lower_bound(omega, a.M, CertificateMode::clump);
  add("clump_duality_vs_sigma_min", d.value, d.sigma_min, d.value <= d.sigma_min * (1 + 1e-10));

  if (a.N > 0) {
    const GridCertificateCheck g = check_grid_certificates(omega, a.M, a.N);
    add("grid_interp_error", g.max_interp_error, 1e-8, g.max_interp_error <= 1e-8);
    add("grid_degree", g.max_degree, g.degree_limit, g.max_degree <= g.degree_limit);
    if (g.hypotheses) {
      add("grid_aggregate_norm", g.aggregate_norm, g.aggregate_bound, g.aggregate_norm <= g.aggregate_bound * (1 + 1e-12));
      add("grid_E", g.e_value, g.e_star, g.e_value <= g.e_star * (1 + 1e-12));
    } else {
      std::printf("  [skip] grid_aggregate_norm, grid_E: grid hypotheses do not hold\n");
    }
    hypotheses = hypotheses && g.hypotheses;
    const DualityBound dg = duality_lower_bound(omega, a.M, CertificateMode::grid, a.N);
    add("grid_duality_vs_sigma_min", dg.value, dg.sigma_min, dg.value <= dg.sigma_min * (1 + 1e-10));
  }
  m.summary = {{"ok", ok}, {"hypotheses_satisfied", hypotheses}};
  rows.write(prepare(a.out) / "records.csv");
  if (!ok) return kExitError;
  return hypotheses ? kExitOk : kExitHypothesis;
}

// ---------------------------------------------------------------------------

int run_selftest(const Output& out, RunManifest& m) {
  CsvTable rows({"check", "value", "expected", "ok"});
  bool all = true;
  auto add = [&](const std::string& name, double v, double expected, bool pass) {
    rows.add({name, v, expected, pass});
    std::printf("  [%s] %s\n", pass ? "ok" : "FAIL", name.c_str());
    all = all && pass;
  };

  for (auto [M, N, S] : {std::tuple{6, 38, 2}, std::tuple{8, 51, 2}, std::tuple{7, 44, 2}}) {
    const std::string tag = "M" + std::to_string(M) + "_N" + std::to_string(N) + "_S" + std::to_string(S);
    const ThetaSearch ts = theta_bruteforce(M, N, S);
    const double lo = theta_lower(M, N, S).value, hi = theta_star(M, N, S);
    add("theta_lower_le_theta_" + tag, lo, ts.theta, lo <= ts.theta);
    add("theta_le_theta_star_" + tag, ts.theta, hi, ts.theta <= hi * (1 + 1e-12));
    add("theta_argmin_consecutive_" + tag, ts.argmin_consecutive(N), 1, ts.argmin_consecutive(N));
  }

  const SandwichReport sw = demanet_sandwich_check(6, 12, 1, 0.1, 50, out.seed);
  add("sandwich_max_error_le_upper", sw.max_error, sw.upper, sw.violations == 0);
  add("sandwich_adversarial_ge_lower", sw.adversarial_error, sw.lower, sw.adversarial_ok);

  std::mt19937_64 rng(derive_seed(out.seed, 99));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int S = 1 + static_cast<int>(i % 6);
    std::vector<double> a, b;
    for (int k = 0; k < S; ++k) {
      a.push_back(unif(rng));
      b.push_back(unif(rng));
    }
    worst = std::max(worst, std::abs(bottleneck_distance(SupportSet(a), SupportSet(b)) -
                                     bottleneck_distance_exhaustive(SupportSet(a), SupportSet(b))));
  }
  add("bottleneck_matches_exhaustive", worst, 0.0, worst == 0.0);

  m.summary = {{"ok", all}};
  rows.write(prepare(out) / "records.csv");
  return all ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-resolution conditioning bounds, MUSIC and sweep drivers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::function<int(RunManifest&)> run;
  Output* active = nullptr;
  nlohmann::json params = nlohmann::json::object();

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Evaluate a closed-form bound and its hypotheses");
  add_output(bounds, ba.out, "bounds", false);
  bounds->add_option("--theorem", ba.theorem, "Which bound")
      ->required()
      ->check(CLI::IsMember({"clump1", "clump2", "upper-equispaced", "theta", "minmax", "music-tolerance", "hankel-noise",
                             "constant-B", "constant-C", "theta-constant"}));
  bounds->add_option("--A", ba.A, "Number of clumps")->capture_default_str();
  bounds->add_option("--lambda", ba.lambda, "Clump size, or one size per clump")->capture_default_str();
  bounds->add_option("--alpha", ba.alpha, "Spacing factor: min separation times M")->capture_default_str();
  bounds->add_option("--M", ba.M, "Cutoff frequency")->capture_default_str();
  bounds->add_option("--N", ba.N, "Grid size");
  bounds->add_option("--S", ba.S, "Sparsity")->capture_default_str();
  bounds->add_option("--L", ba.L, "Pencil parameter (default M/2)");
  bounds->add_option("--delta", ba.delta, "Noise budget for min-max bounds")->capture_default_str();
  bounds->add_option("--nu", ba.nu, "Probability exponent")->capture_default_str();
  bounds->add_option("--epsilon", ba.epsilon, "Correlation-function tolerance")->capture_default_str();
  bounds->add_option("--sigma", ba.sigma, "Noise level")->capture_default_str();
  bounds->add_option("--dist", ba.dist, "Minimum distance between clumps");
  bounds->add_option("--t", ba.t, "Tail threshold for hankel-noise");
  bounds->add_option("--nodes", ba.nodes, "Explicit support");
  bounds->callback([&] {
    active = &ba.out;
    params = {{"theorem", ba.theorem}, {"A", ba.A}, {"lambda", ba.lambda}, {"alpha", ba.alpha}, {"M", ba.M},
              {"N", ba.N}, {"S", ba.S}, {"L", ba.L}, {"delta", ba.delta}, {"nu", ba.nu}, {"epsilon", ba.epsilon},
              {"sigma", ba.sigma}, {"nodes", ba.nodes}};
    if (ba.dist) params["dist"] = *ba.dist;
    if (ba.t) params["t"] = *ba.t;
    run = [&](RunManifest& m) { return run_bounds(ba, m); };
  });

  SigmaMinArgs sa;
  auto* smin = app.add_subcommand("sweep-sigma-min", "sigma_min of clump scenes against the clump lower bound");
  add_output(smin, sa.out, "sweep-sigma-min", true);
  smin->add_option("--A", sa.A, "Clump counts")->capture_default_str();
  smin->add_option("--lambda", sa.lambda, "Clump sizes")->capture_default_str();
  smin->add_option("--srf-max", sa.srf_max, "Largest SRF; each lambda starts at SRF = lambda")->capture_default_str();
  smin->add_option("--srf-points", sa.srf_points, "SRF points per lambda")->capture_default_str();
  smin->add_option("--M", sa.M, "Cutoff frequency")->capture_default_str();
  smin->add_option("--beta", sa.beta, "Clump gap factor (default 20 S^1/2 lambda^5/2 alpha^-1/2)");
  smin->callback([&] {
    active = &sa.out;
    params = {{"A", sa.A}, {"lambda", sa.lambda}, {"srf_max", sa.srf_max}, {"srf_points", sa.srf_points}, {"M", sa.M}};
    if (sa.beta) params["beta"] = *sa.beta;
    run = [&](RunManifest& m) { return run_sigma_min(sa, m); };
  });

  ThetaArgs ta;
  auto* theta = app.add_subcommand("sweep-theta", "Theta lower bound against consecutive-node sigma_min");
  add_output(theta, ta.out, "sweep-theta", false);
  theta->add_option("--S", ta.S, "Sparsities")->capture_default_str();
  theta->add_option("--srf-min", ta.srf_min)->capture_default_str();
  theta->add_option("--srf-max", ta.srf_max)->capture_default_str();
  theta->add_option("--srf-points", ta.srf_points)->capture_default_str();
  theta->add_option("--M", ta.M, "Cutoff frequency")->capture_default_str();
  theta->callback([&] {
    active = &ta.out;
    params = {{"S", ta.S}, {"srf_min", ta.srf_min}, {"srf_max", ta.srf_max}, {"srf_points", ta.srf_points}, {"M", ta.M}};
    run = [&](RunManifest& m) { return run_theta(ta, m); };
  });

  MusicDemoArgs ma;
  auto* demo = app.add_subcommand("music-demo", "Correlation and imaging functions of one noisy scene");
  add_output(demo, ma.out, "music-demo", true);
  demo->add_option("--M", ma.M)->capture_default_str();
  demo->add_option("--nodes", ma.nodes, "True support")->capture_default_str();
  demo->add_option("--sigma", ma.sigma, "Noise level")->capture_default_str();
  demo->add_option("--L", ma.L, "Pencil parameter (default M/2)");
  demo->add_option("--grid", ma.grid, "Imaging grid size (default 16 M)");
  demo->add_flag("--refine", ma.refine, "Golden-section refinement of picked peaks");
  demo->callback([&] {
    active = &ma.out;
    params = {{"M", ma.M}, {"nodes", ma.nodes}, {"sigma", ma.sigma}, {"L", ma.L}, {"grid", ma.grid}, {"refine", ma.refine}};
    run = [&](RunManifest& m) { return run_music_demo(ma, m); };
  });

  PhaseArgs pa;
  auto* phase = app.add_subcommand("phase-transition", "MUSIC success over an SRF x sigma grid and the fitted exponent q");
  add_output(phase, pa.out, "phase-transition", true);
  phase->add_option("--A", pa.A)->capture_default_str();
  phase->add_option("--lambda", pa.lambda)->capture_default_str();
  phase->add_option("--M", pa.M)->capture_default_str();
  phase->add_option("--beta", pa.beta, "Clump gap factor")->capture_default_str();
  phase->add_option("--trials", pa.trials)->capture_default_str();
  phase->add_option("--srf-min", pa.srf_min)->capture_default_str();
  phase->add_option("--srf-max", pa.srf_max)->capture_default_str();
  phase->add_option("--srf-points", pa.srf_points)->capture_default_str();
  phase->add_option("--sigma-min", pa.sigma_min)->capture_default_str();
  phase->add_option("--sigma-max", pa.sigma_max)->capture_default_str();
  phase->add_option("--sigma-per-decade", pa.sigma_per_decade)->capture_default_str();
  phase->add_flag("--no-refine", pa.no_refine, "Keep grid peaks unrefined");
  phase->callback([&] {
    active = &pa.out;
    params = {{"A", pa.A}, {"lambda", pa.lambda}, {"M", pa.M}, {"beta", pa.beta}, {"trials", pa.trials},
              {"srf_min", pa.srf_min}, {"srf_max", pa.srf_max}, {"srf_points", pa.srf_points},
              {"sigma_min", pa.sigma_min}, {"sigma_max", pa.sigma_max}, {"sigma_per_decade", pa.sigma_per_decade},
              {"refine", !pa.no_refine}};
    run = [&](RunManifest& m) { return run_phase(pa, m); };
  });

  CertifyArgs ca;
  auto* cert = app.add_subcommand("certify", "Build and check the dual certificates of a support");
  add_output(cert, ca.out, "certify", false);
  cert->add_option("--nodes", ca.nodes, "Support")->required();
  cert->add_option("--M", ca.M, "Cutoff frequency")->required();
  cert->add_option("--N", ca.N, "Grid size; enables grid certificates");
  cert->callback([&] {
    active = &ca.out;
    params = {{"nodes", ca.nodes}, {"M", ca.M}, {"N", ca.N}};
    run = [&](RunManifest& m) { return run_certify(ca, m); };
  });

  Output so;
  auto* self = app.add_subcommand("selftest", "Tiny-scale oracle checks");
  add_output(self, so, "selftest", true);
  self->callback([&] {
    active = &so;
    run = [&](RunManifest& m) { return run_selftest(so, m); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.command = app.get_subcommands().front()->get_name();
  manifest.seed = active->seed;
  manifest.params = params;
  manifest.outputs.push_back("records.csv");
  int code = kExitOk;
  try {
    code = run(manifest);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    code = e.code() == ErrorCode::hypothesis_violation ? kExitHypothesis : kExitError;
    manifest.summary["error"] = e.what();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kExitError;
    manifest.summary["error"] = e.what();
  }
  manifest.summary["exit_code"] = code;
  try {
    manifest.write(prepare(*active) / "manifest.json");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return code;
}
