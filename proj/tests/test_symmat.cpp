#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lmcf/symmat.hpp"
#include "support.hpp"

using namespace lmcf;
using lmcf::testing::conjugate;
using lmcf::testing::random_orthogonal;
using lmcf::testing::random_symmetric;

namespace {
constexpr double kPi = std::numbers::pi;

double reconstruction_residual(const SymMat& m, const EigenSym& e) {
  const int n = m.dim();
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double mq = 0.0;
      for (int j = 0; j < n; ++j) mq += m(i, j) * e.vectors(j, k);
      r = std::max(r, std::abs(mq - e.vectors(i, k) * e.values[k]));
    }
  return r;
}
}  // namespace

TEST_CASE("eigen_sym of the identity is the identity frame") {
  for (int n = 1; n <= 3; ++n) {
    const EigenSym e = eigen_sym(SymMat::identity(n));
    for (int i = 0; i < n; ++i) {
      CHECK(e.values[i] == 1.0);
      for (int j = 0; j < n; ++j) CHECK(e.vectors(i, j) == (i == j ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("eigenvalues are sorted ascending") {
  const std::vector<double> d{3.0, 1.0, 2.0};
  const EigenSym e = eigen_sym(SymMat::diagonal(d));
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.values[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(e.values[2] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("random symmetric matrices reconstruct and have proper rotation frames") {
  std::mt19937 rng(7);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 500; ++trial) {
      const SymMat m = random_symmetric(n, rng, trial % 2 ? 10.0 : 1.0);
      const EigenSym e = eigen_sym(m);
      CHECK(reconstruction_residual(m, e) <= 1e-12 * (1 + m.max_abs()));
      CHECK(std::abs(e.vectors.determinant() - 1.0) <= 1e-12);
      for (int k = 1; k < n; ++k) CHECK(e.values[k - 1] <= e.values[k]);
    }
  }
}

TEST_CASE("repeated eigenvalues are handled") {
  std::mt19937 rng(11);
  const auto q = random_orthogonal(3, rng);
  const SymMat m = conjugate(q, {2.0, 2.0, -1.0}, 3);
  const EigenSym e = eigen_sym(m);
  CHECK(reconstruction_residual(m, e) <= 1e-12 * (1 + m.max_abs()));
  CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(e.values[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(e.values[2] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("theta examples") {
  CHECK(theta(SymMat(3)) == 0.0);
  CHECK(theta(SymMat::identity(2)) == doctest::Approx(kPi / 2).epsilon(1e-15));
  const double r3 = std::sqrt(3.0);
  CHECK(std::abs(theta(SymMat::scalar(3, r3)) - kPi) <= 1e-12);
}

TEST_CASE("theta is invariant under orthogonal conjugation") {
  std::mt19937 rng(3);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 300; ++trial) {
      const SymMat m = random_symmetric(n, rng, 3.0);
      const SymMat c = conjugate(random_orthogonal(n, rng), m);
      CHECK(std::abs(theta(c) - theta(m)) <= 1e-12);
      const double bound = n * kPi / 2;
      CHECK(std::abs(theta(m)) < bound);
    }
}

TEST_CASE("metric examples") {
  const Metric zero = metric(SymMat(2));
  CHECK(zero.g == SymMat::identity(2));
  CHECK(zero.g_inverse == SymMat::identity(2));
  const std::vector<double> d{1.0, -1.0};
  const Metric m = metric(SymMat::diagonal(d));
  CHECK(m.g(0, 0) == doctest::Approx(2.0));
  CHECK(m.g(1, 1) == doctest::Approx(2.0));
  CHECK(m.g(0, 1) == 0.0);
  CHECK(m.g_inverse(0, 0) == doctest::Approx(0.5));
  CHECK(m.g_inverse(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("metric eigenvalues are 1 + lambda^2 and g g^-1 = I") {
  std::mt19937 rng(5);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 300; ++trial) {
      const SymMat a = random_symmetric(n, rng, 2.0);
      const Metric m = metric(a);
      const auto lam = eigenvalues(a);
      const auto gl = eigenvalues(m.g);
      const auto gi = eigenvalues(m.g_inverse);
      std::array<double, kMaxDim> expected{};
      for (int i = 0; i < n; ++i) expected[i] = 1 + lam[i] * lam[i];
      std::sort(expected.begin(), expected.begin() + n);
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(gl[i] - expected[i]) <= 1e-12 * (1 + gl[i]));
        CHECK(gi[i] > 0.0);
        CHECK(gi[i] <= 1.0 + 1e-15);
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += m.g(i, k) * m.g_inverse(k, j);
          CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("rotate_spectrum examples") {
  CHECK(std::abs(rotate_spectrum(SymMat::identity(1), kPi / 4)(0, 0)) <= 1e-15);
  const double delta = 0.5;
  const SymMat m = SymMat::scalar(1, 1 - delta);
  CHECK(std::abs(rotate_spectrum(m, -kPi / 4)(0, 0) - (2 - delta) / delta) <= 1e-12);
  for (double sigma : {-1.2, -0.3, 0.0, 0.7, 1.5}) {
    const SymMat r = rotate_spectrum(SymMat(3), sigma);
    for (int i = 0; i < 3; ++i) {
      CHECK(r(i, i) == doctest::Approx(std::tan(-sigma)).epsilon(1e-14));
      for (int j = i + 1; j < 3; ++j) CHECK(std::abs(r(i, j)) <= 1e-15);
    }
  }
}

TEST_CASE("rotate_spectrum rejects rotations past vertical") {
  CHECK_THROWS_AS(rotate_spectrum(SymMat(1), kPi / 2), GraphConditionError);
  try {
    (void)rotate_spectrum(SymMat::scalar(2, 1.0), 3 * kPi / 4 + 1e-3);
    FAIL("expected a graph condition error");
  } catch (const GraphConditionError& e) {
    CHECK(e.eigenvalue() == 1.0);
  }
}

TEST_CASE("rotate_spectrum round trip and frame preservation") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> angle(-0.6, 0.6);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 200; ++trial) {
      const SymMat m = random_symmetric(n, rng, 1.0);
      const double sigma = angle(rng);
      const auto ev = eigenvalues(m);
      if (std::atan(ev[0]) - sigma <= -kPi / 2 + 0.05 || std::atan(ev[n - 1]) - sigma >= kPi / 2 - 0.05)
        continue;
      const SymMat r = rotate_spectrum(m, sigma);
      const SymMat back = rotate_spectrum(r, -sigma);
      CHECK((back - m).max_abs() <= 1e-10);
      // Every eigenvector of m is an eigenvector of r with the rotated value.
      const EigenSym e = eigen_sym(m);
      for (int k = 0; k < n; ++k) {
        const double target = std::tan(std::atan(e.values[k]) - sigma);
        for (int i = 0; i < n; ++i) {
          double rv = 0.0;
          for (int j = 0; j < n; ++j) rv += r(i, j) * e.vectors(j, k);
          CHECK(std::abs(rv - target * e.vectors(i, k)) <= 1e-10);
        }
      }
    }
}

TEST_CASE("phase and pair side conditions") {
  const double r3 = std::sqrt(3.0);
  const std::vector<double> a{r3, -r3};
  CHECK(ty_condition_ii(SymMat::diagonal(a)));
  CHECK(std::abs(ty_condition_ii_value(SymMat::diagonal(a))) <= 1e-14);
  const std::vector<double> b{2.0, -2.0};
  CHECK_FALSE(ty_condition_ii(SymMat::diagonal(b)));
  CHECK(ty_condition_ii_value(SymMat::diagonal(b)) == doctest::Approx(-1.0));
  CHECK(ty_condition_i(SymMat::identity(3)));
  const std::vector<double> c{-1.0, -1.0, -1.0};
  CHECK_FALSE(ty_condition_i(SymMat::diagonal(c)));
}

TEST_CASE("condition (ii) holds whenever the spectrum lies in [-sqrt 3, sqrt 3]") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 1000; ++trial) {
      std::array<double, kMaxDim> lam{u(rng), u(rng), u(rng)};
      const SymMat m = conjugate(random_orthogonal(n, rng), lam, n);
      const auto ev = eigenvalues(m);
      if (std::max(-ev[0], ev[n - 1]) > std::sqrt(3.0)) continue;
      CHECK(ty_condition_ii(m));
    }
}

TEST_CASE("phase_gap examples") {
  const PhaseCone cone(2, kPi / 2);
  CHECK(std::abs(phase_gap(SymMat::identity(2), cone)) <= 1e-15);
  CHECK(cone.contains(SymMat::identity(2)));
  CHECK(std::abs(phase_gap(SymMat::scalar(2, 1.2), cone) - (2 * std::atan(1.2) - kPi / 2)) <= 1e-12);
  CHECK(phase_gap(SymMat::scalar(2, 1.2), cone) == doctest::Approx(0.18132).epsilon(1e-4));
  CHECK(phase_gap(SymMat(2), cone) == doctest::Approx(-kPi / 2));
  CHECK_THROWS_AS(PhaseCone(2, kPi), std::invalid_argument);
  CHECK_THROWS_AS(PhaseCone(2, -kPi), std::invalid_argument);
}

TEST_CASE("phase cone is convex on positive semidefinite matrices") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ev(0.0, 6.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 2; n <= 3; ++n) {
    const double lo = (n - 2) * kPi / 2;
    int tested = 0;
    for (int trial = 0; trial < 20000 && tested < 2000; ++trial) {
      const double tau = lo + unit(rng) * (n * kPi / 2 - lo) * 0.9;
      const SymMat a = conjugate(random_orthogonal(n, rng), {ev(rng), ev(rng), ev(rng)}, n);
      const SymMat b = conjugate(random_orthogonal(n, rng), {ev(rng), ev(rng), ev(rng)}, n);
      const PhaseCone cone(n, tau);
      if (!cone.contains(a) || !cone.contains(b)) continue;
      ++tested;
      for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        CHECK(theta(alpha * a + (1 - alpha) * b) >= tau - 1e-12);
      }
    }
    CHECK(tested > 100);
  }
}

TEST_CASE("inverse and from_row_major validation") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const SymMat m = random_symmetric(3, rng) + SymMat::scalar(3, 4.0);
    const SymMat inv = inverse(m);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += m(i, k) * inv(k, j);
        CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
  }
  const std::vector<double> bad{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(SymMat::from_row_major(2, bad), std::invalid_argument);
  CHECK_THROWS_AS(SymMat(4), std::invalid_argument);
}
