#include <catch_amalgamated.hpp>

#include <random>

#include "superres/bounds.hpp"

using namespace superres;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
const double kB1 = 20.0 * std::numbers::sqrt2 / 19.0;

SupportSet equispaced(double start, int lambda, double spacing) {
  std::vector<double> pts;
  for (int i = 0; i < lambda; ++i) pts.push_back(start + i * spacing);
  return SupportSet(pts);
}

double smin(const SupportSet& s, int M) { return sigma_extremes(vandermonde(s, M)).min; }

}  // namespace

TEST_CASE("constant_B") {
  CHECK(constant_B(1, 7) == Approx(1.4886).epsilon(1e-4));
  CHECK(constant_B(1, 7) == Approx(kB1));
  CHECK(constant_B(2, 1000) == Approx(kB1 / std::sqrt(1 - kPi * kPi / 12)));
  CHECK(constant_B(3, 300000) == Approx(kB1 / (1 - kPi * kPi / 27)));
  // odd M carries the rounding factor (M/2)/floor(M/2)
  CHECK(constant_B(2, 101) == Approx(constant_B(2, 100) * (50.5 / 50)));
  try {
    constant_B(5, 4);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::hypothesis_violation);
  }
}

TEST_CASE("constant_C") {
  CHECK(constant_C(1, 50) == constant_B(1, 50));
  CHECK(constant_C(2, 64) == Approx(constant_B(2, 64) * (2 / kPi) * std::numbers::sqrt2));
  // lambda = 4: sum_j prod 1/(j-k)^2 = 1/36 + 1/4 + 1/4 + 1/36 = 5/9
  CHECK(constant_C(4, 400) == Approx(constant_B(4, 400) * std::pow(4 / kPi, 3) * std::sqrt(5.0 / 9.0)));
}

TEST_CASE("clump1 for well-separated singletons") {
  const int M = 400;
  const int S = 4;
  SupportSet s{0.1, 0.3, 0.55, 0.8};
  REQUIRE(min_separation(s) >= 10 * std::sqrt(S) / M);
  BoundReport r = clump1_lower(s, M);
  CHECK(r.hypotheses_satisfied);
  // sqrt(M) (S B^2)^{-1/2}
  CHECK(r.value == Approx(std::sqrt(double(M) / S) / kB1));
  CHECK(smin(s, M) >= (19.0 / (20.0 * std::numbers::sqrt2)) * std::sqrt(M));
  CHECK(r.value <= smin(s, M));
}

TEST_CASE("clump1 on a two-node clump") {
  const int M = 200;
  const double d = 0.3 / M;
  SupportSet s{0.4, 0.4 + d};
  BoundReport r = clump1_lower(s, M);
  const double rho = 1.0 / (kPi * M * d);
  const double term = constant_B(2, M) * 2 * rho;
  CHECK(r.value == Approx(std::sqrt(M / (2 * term * term))));
  CHECK(r.value <= smin(s, M));
  CHECK(r.hypotheses_satisfied);
}

TEST_CASE("clump1 flags M < 2S^2 and rejects non-clump supports") {
  BoundReport r = clump1_lower(SupportSet{0.1, 0.4, 0.7}, 10);
  CHECK_FALSE(r.hypotheses_satisfied);
  CHECK(r.value > 0);
  try {
    clump1_lower(SupportSet{0, 0.005, 0.010, 0.015, 0.020, 0.025}, 50);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::model_violation);
  }
}

TEST_CASE("clump2 closed forms") {
  const int M = 100;
  BoundReport one = clump2_lower(std::vector<int>{2}, 0.25, M);
  CHECK(one.value == Approx(std::sqrt(M) * 0.25 / constant_C(2, M)));
  CHECK(one.hypotheses_satisfied);

  const int A = 3, lambda = 3;
  const double alpha = 0.2;
  BoundReport many = clump2_lower(std::vector<int>(A, lambda), alpha, 200, 0.5);
  CHECK(many.value == Approx(std::sqrt(200.0) * std::pow(alpha, lambda - 1) / (constant_C(lambda, 200) * std::sqrt(A))));

  BoundReport missing = clump2_lower(std::vector<int>{2, 2}, 0.5, 100);
  CHECK_FALSE(missing.hypotheses_satisfied);
  BoundReport bad_alpha = clump2_lower(std::vector<int>{3}, 0.6, 100);
  CHECK_FALSE(bad_alpha.hypotheses_satisfied);
}

TEST_CASE("clump1 equals clump2 on equispaced clumps") {
  for (int lambda : {2, 3, 4}) {
    const int M = 2 * lambda * lambda * 20;
    const double alpha = 0.7 / lambda;
    SupportSet s = equispaced(0.2, lambda, alpha / M);
    const double c1 = clump1_lower(s, M).value;
    const double c2 = clump2_lower(s, M).value;
    CHECK(c1 == Approx(c2).epsilon(1e-10));
    CHECK(c1 <= smin(s, M));
  }
}

TEST_CASE("upper_equispaced") {
  BoundReport r = upper_equispaced(2, 0.03, 99);
  CHECK(r.value == Approx(2.0 * 10 * 2 * kPi * 0.03 / std::numbers::sqrt2));
  CHECK(r.value == Approx(2.666).epsilon(1e-3));
  CHECK(r.hypotheses_satisfied);
  CHECK(r.hypothesis_log[0].rhs == Approx(1.0 / (kPi * 10)));
  CHECK(smin(equispaced(0.5, 2, 0.03 / 99), 99) <= r.value);
  CHECK(upper_equispaced(1, 0.3, 48).value == Approx(2 * 7.0));
  CHECK(upper_equispaced(1, 0.3, 48).hypotheses_satisfied);
  CHECK_FALSE(upper_equispaced(3, 0.5, 99).hypotheses_satisfied);
}

TEST_CASE("theta_lower") {
  const int M = 10;
  const double c = std::sqrt((12 - kPi * kPi) / 24) / std::numbers::sqrt2 / std::numbers::sqrt2 * (kPi / 2);
  CHECK(theta_constant(M, 2) == Approx(c));
  CHECK(theta_lower(M, 80, 2).value == Approx(c * std::sqrt(M) * (10.0 / 80)));
  CHECK(theta_lower(M, 200, 3).value == Approx(4.0 * theta_lower(M, 400, 3).value));
  CHECK(theta_lower(6, 38, 2).hypotheses_satisfied);
  CHECK_FALSE(theta_lower(6, 30, 2).hypotheses_satisfied);
}

TEST_CASE("subset enumeration") {
  int count = 0;
  std::vector<int> first, last;
  for_each_subset(7, 3, [&](const std::vector<int>& idx) {
    if (count == 0) first = idx;
    last = idx;
    ++count;
  });
  CHECK(count == 35);
  CHECK(first == std::vector<int>{0, 1, 2});
  CHECK(last == std::vector<int>{4, 5, 6});
}

TEST_CASE("theta_bruteforce oracles") {
  ThetaSearch one = theta_bruteforce(5, 9, 1);
  CHECK(one.theta == Approx(std::sqrt(6.0)));
  ThetaSearch t = theta_bruteforce(6, 38, 2);
  CHECK(t.subsets == 703);
  CHECK(t.argmin_consecutive(38));
  CHECK(theta_lower(6, 38, 2).value <= t.theta);
  CHECK(t.theta <= theta_star(6, 38, 2) * (1 + 1e-12));
  CHECK(theta_star(6, 38, 1) == Approx(std::sqrt(7.0)));
  CHECK_THROWS_AS(theta_bruteforce(10, 200, 4), Error);
}

TEST_CASE("theta_star sits under the equispaced upper bound") {
  const int M = 20, S = 3;
  for (int N : {200, 400, 800}) {
    BoundReport up = upper_equispaced(S, double(M) / N, M);
    if (up.hypotheses_satisfied) CHECK(theta_star(M, N, S) <= up.value);
  }
}

TEST_CASE("minmax bounds") {
  MinMaxBounds a = minmax_bounds(16, 2048, 1, 1.0);
  MinMaxBounds b = minmax_bounds(16, 2048, 1, 2.0);
  CHECK(b.upper.value == Approx(2 * a.upper.value));
  CHECK(b.lower.value == Approx(2 * a.lower.value));
  // S = 1: upper = 2/(C(16,2) 4) (128), lower = (1/4) sqrt(2) / sqrt(17) (128/(2 pi))
  CHECK(a.upper.value == Approx(2.0 / theta_constant(16, 2) / 4.0 * 128.0));
  CHECK(a.lower.value == Approx(0.25 * std::sqrt(2.0) / std::sqrt(17.0) * 128.0 / (2 * kPi)));
  int both = 0;
  for (int S : {1, 2})
    for (int M : {8, 12, 16, 24})
      for (int f : {1, 2, 4, 8, 16, 64, 256, 1024}) {
        const int N = static_cast<int>(std::lround(2 * kPi * M * S * f * 3));
        MinMaxBounds mm = minmax_bounds(M, N, S, 0.1);
        if (mm.lower.hypotheses_satisfied && mm.upper.hypotheses_satisfied) {
          ++both;
          CHECK(mm.lower.value <= mm.upper.value);
        }
      }
  CHECK(both > 3);
}

TEST_CASE("music noise tolerance") {
  CHECK_THROWS_AS(music_noise_tolerance({2}, 0.5, 101, 2, 0.1), Error);
  try {
    music_noise_tolerance({2}, 0.5, 101, 2, 0.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::even_m_required);
  }
  BoundReport r = music_noise_tolerance({2}, 0.5, 100, 2.0, 0.1);
  const double c = constant_C(2, 50);
  CHECK(r.value == Approx(100.0 / (32 * std::sqrt(2.0 * 102 * std::log(102.0))) / (c * c / 0.25) * 0.1));
  CHECK(music_noise_tolerance({2}, 0.5, 100, 2.0, 0.2).value == Approx(2 * r.value));
  for (int lambda : {2, 3}) {
    const double full = music_noise_tolerance({lambda}, 0.4, 200, 2.0, 0.1).value;
    const double half = music_noise_tolerance({lambda}, 0.2, 200, 2.0, 0.1).value;
    CHECK(half / full == Approx(std::pow(2.0, -(2 * lambda - 2))));
  }
}

TEST_CASE("hankel noise bound closed forms") {
  CHECK(hankel_noise_bound(100, 50, 0.0).mean_bound == 0.0);
  HankelNoiseBound b = hankel_noise_bound(100, 50, 1.0);
  CHECK(b.mean_bound == Approx(std::sqrt(2 * 51 * std::log(102.0))));
  CHECK(b.tail(10.0) == Approx(102 * std::exp(-100.0 / (2 * 51))));
  CHECK_THROWS_AS(hankel_noise_bound(10, 11, 1.0), Error);
}

TEST_CASE("sparsest fit recovers noiseless sparse vectors") {
  const int M = 6, N = 12;
  CMatrix F(M + 1, N);
  for (int n = 0; n < N; ++n) F.col(n) = steering_vector(TorusPoint(double(n) / N), M);
  CVector x = CVector::Zero(N);
  x(3) = Complex(0.7, -0.2);
  SparseFit fit = sparsest_fit(F * x, N, 1, 0.0);
  CHECK((dense_from_sparse(fit, N) - x).norm() < 1e-12);
  x(9) = Complex(-1.1, 0.4);
  fit = sparsest_fit(F * x, N, 2, 0.0);
  CHECK((dense_from_sparse(fit, N) - x).norm() < 1e-10);
}

TEST_CASE("min-max sandwich check at desk scale") {
  SandwichReport r = demanet_sandwich_check(6, 12, 1, 0.1, 50, 3);
  CHECK(r.violations == 0);
  CHECK(r.max_error <= r.upper);
  CHECK(r.adversarial_ok);
  CHECK(r.theta_2s == Approx(theta_bruteforce(6, 12, 2).theta));
  SandwichReport exact = demanet_sandwich_check(6, 12, 1, 0.0, 10, 4);
  CHECK(exact.max_error < 1e-10);
  CHECK_THROWS_AS(demanet_sandwich_check(6, 40, 1, 0.1, 5, 1), Error);
}
