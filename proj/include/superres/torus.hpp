#pragma once

// Points, distances and clump geometry on the torus T = [0, 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "superres/error.hpp"

namespace superres {

// Two nodes closer than this are the same node.
inline constexpr double kNodeTolerance = 1e-12;

inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  // x = -tiny gives r == 1.0 after rounding.
  return r >= 1.0 ? 0.0 : r;
}

class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(double v) : value_(wrap_unit(v)) {}

  double value() const { return value_; }
  TorusPoint shifted(double t) const { return TorusPoint(value_ + t); }

 private:
  double value_ = 0.0;
};

/// Metric on the torus, in [0, 1/2].
inline double torus_dist(double a, double b) {
  double d = std::fabs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

inline double torus_dist(TorusPoint a, TorusPoint b) { return torus_dist(a.value(), b.value()); }

/// Ordered set of distinct nodes on the torus.
class SupportSet {
 public:
  SupportSet() = default;

  explicit SupportSet(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error(ErrorCode::invalid_support, "support set must be nonempty");
    for (double& x : nodes_) {
      if (!std::isfinite(x)) throw Error(ErrorCode::invalid_support, "non-finite node");
      x = wrap_unit(x);
    }
    std::sort(nodes_.begin(), nodes_.end());
    const std::size_t s = nodes_.size();
    for (std::size_t i = 0; i < s && s > 1; ++i) {
      if (torus_dist(nodes_[i], nodes_[(i + 1) % s]) < kNodeTolerance) {
        throw Error(ErrorCode::invalid_support, "nodes must be pairwise distinct");
      }
    }
  }

  SupportSet(std::initializer_list<double> nodes) : SupportSet(std::vector<double>(nodes)) {}

  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  TorusPoint point(std::size_t i) const { return TorusPoint(nodes_[i]); }
  std::span<const double> values() const { return nodes_; }
  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }

  /// Circular gap from node i to its successor, in (0, 1].
  double gap_after(std::size_t i) const {
    const std::size_t s = nodes_.size();
    if (s == 1) return 1.0;
    return i + 1 < s ? nodes_[i + 1] - nodes_[i] : 1.0 - nodes_[s - 1] + nodes_[0];
  }

  SupportSet shifted(double t) const {
    std::vector<double> moved(nodes_);
    for (double& x : moved) x += t;
    return SupportSet(std::move(moved));
  }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<double> nodes_;
};

/// Minimum pairwise torus distance.
inline double min_separation(const SupportSet& omega) {
  if (omega.size() < 2) throw Error(ErrorCode::degenerate_support, "minimum separation needs S >= 2");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double g = omega.gap_after(i);
    best = std::min(best, std::min(g, 1.0 - g));
  }
  return best;
}

struct ClumpDecomposition {
  std::vector<std::vector<std::size_t>> clumps;  // node indices, circular order
  std::vector<std::size_t> clump_of;             // node index -> clump index
  double min_interclump_dist = std::numeric_limits<double>::infinity();

  std::size_t count() const { return clumps.size(); }
  std::size_t size_of(std::size_t a) const { return clumps[a].size(); }
  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const auto& c : clumps) out.push_back(c.size());
    return out;
  }
};

/// Chains nodes whose circular gap is below 1/M and checks the localized-clump
/// conditions on the result. Returns nullopt when the set is not decomposable.
inline std::optional<ClumpDecomposition> decompose_clumps(const SupportSet& omega, int M) {
  if (M < 1) throw Error(ErrorCode::invalid_argument, "M must be positive");
  const std::size_t s = omega.size();
  const double rl = 1.0 / M;

  ClumpDecomposition out;
  out.clump_of.assign(s, 0);
  if (s == 1) {
    out.clumps.push_back({0});
    return out;
  }

  std::vector<std::size_t> splits;
  for (std::size_t i = 0; i < s; ++i)
    if (omega.gap_after(i) >= rl) splits.push_back(i);

  std::vector<double> spans;
  if (splits.empty()) {
    std::size_t widest = 0;
    for (std::size_t i = 1; i < s; ++i)
      if (omega.gap_after(i) > omega.gap_after(widest)) widest = i;
    std::vector<std::size_t> chain;
    for (std::size_t k = 1; k <= s; ++k) chain.push_back((widest + k) % s);
    out.clumps.push_back(std::move(chain));
    spans.push_back(1.0 - omega.gap_after(widest));
  } else {
    std::size_t i = (splits.front() + 1) % s;
    std::vector<std::size_t> chain;
    double span = 0.0;
    for (std::size_t visited = 0; visited < s; ++visited, i = (i + 1) % s) {
      chain.push_back(i);
      if (omega.gap_after(i) >= rl) {
        out.clumps.push_back(std::move(chain));
        spans.push_back(span);
        chain.clear();
        span = 0.0;
      } else {
        span += omega.gap_after(i);
      }
    }
  }

  for (double span : spans)
    if (!(span < rl)) return std::nullopt;

  std::sort(out.clumps.begin(), out.clumps.end(), [](const auto& a, const auto& b) {
    return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
  });
  for (std::size_t a = 0; a < out.clumps.size(); ++a)
    for (std::size_t j : out.clumps[a]) out.clump_of[j] = a;

  if (out.clumps.size() > 1) {
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t k = j + 1; k < s; ++k)
        if (out.clump_of[j] != out.clump_of[k])
          out.min_interclump_dist = std::min(out.min_interclump_dist, torus_dist(omega[j], omega[k]));
    if (!(out.min_interclump_dist > rl)) return std::nullopt;
  }
  return out;
}

struct Complexities {
  std::vector<double> rho;
};

/// rho_j = prod over neighbours within 1/M of 1 / (pi M |w_j - w_k|).
inline Complexities complexity(const SupportSet& omega, int M) {
  if (M < 1) throw Error(ErrorCode::invalid_argument, "M must be positive");
  Complexities out;
  out.rho.assign(omega.size(), 1.0);
  const double rl = 1.0 / M;
  for (std::size_t j = 0; j < omega.size(); ++j) {
    for (std::size_t k = 0; k < omega.size(); ++k) {
      if (k == j) continue;
      const double d = torus_dist(omega[j], omega[k]);
      if (d > 0.0 && d < rl) out.rho[j] /= std::numbers::pi * M * d;
    }
  }
  return out;
}

/// Super-resolution factor 1/(M Delta).
inline double srf(const SupportSet& omega, int M) {
  if (M < 1) throw Error(ErrorCode::invalid_argument, "M must be positive");
  return 1.0 / (M * min_separation(omega));
}

/// Min over bijections of the max displacement. Uses the S cyclic alignments
/// of the two sorted circular sequences.
inline double bottleneck_distance(const SupportSet& a, const SupportSet& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::cardinality_mismatch, "bottleneck distance needs |A| = |B|");
  const std::size_t s = a.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < s; ++shift) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s && worst < best; ++i)
      worst = std::max(worst, torus_dist(a[i], b[(i + shift) % s]));
    best = std::min(best, worst);
  }
  return best;
}

/// All-permutations reference for bottleneck_distance (S <= 8).
inline double bottleneck_distance_exhaustive(const SupportSet& a, const SupportSet& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::cardinality_mismatch, "bottleneck distance needs |A| = |B|");
  if (a.size() > 8) throw Error(ErrorCode::intractable_enumeration, "exhaustive matching limited to S <= 8");
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) worst = std::max(worst, torus_dist(a[i], b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace superres
