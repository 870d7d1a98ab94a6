#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lmcf/initial.hpp"
#include "lmcf/mollify.hpp"
#include "lmcf/monitors.hpp"

using namespace lmcf;

namespace {
constexpr double kPi = std::numbers::pi;

ScalarField random_smooth(const Grid& g, std::mt19937& rng, int modes) {
  std::uniform_real_distribution<double> amp(-0.2, 0.2);
  std::uniform_real_distribution<double> ph(0, 2 * kPi);
  std::uniform_int_distribution<int> wave(-3, 3);
  std::vector<TrigTerm> terms;
  for (int m = 0; m < modes; ++m) {
    TrigTerm t;
    t.amplitude = amp(rng);
    for (int a = 0; a < g.dim(); ++a) t.wave[a] = wave(rng);
    t.phase = ph(rng);
    terms.push_back(t);
  }
  return trig(g, SymMat(g.dim()), terms);
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}
}  // namespace

TEST_CASE("kernel weights form a symmetric partition of unity") {
  for (double k : {0.01, 1.0, 4.0, 64.0, 1e6}) {
    const MollifierKernel kernel(Grid(2, {128, 48}, {2 * kPi, 3.0}), k);
    for (int a = 0; a < 2; ++a) {
      const auto w = kernel.weights(a);
      double sum = 0.0;
      for (double v : w) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-14);
      for (std::size_t j = 1; j < w.size(); ++j) CHECK(w[j] == w[w.size() - j]);
    }
  }
}

TEST_CASE("kernel concentrates for large k and flattens for small k") {
  const MollifierKernel sharp(Grid::cube(1, 64), 1e8);
  CHECK(std::abs(sharp.weights(0)[0] - 1.0) <= 1e-12);
  const MollifierKernel flat(Grid::cube(1, 64), 1e-6);
  for (double v : flat.weights(0)) CHECK(v == doctest::Approx(1.0 / 64).epsilon(1e-10));
  CHECK_THROWS_AS(MollifierKernel(Grid::cube(1, 64), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MollifierKernel(Grid::cube(1, 64), -1.0), std::invalid_argument);
}

TEST_CASE("kernel matches the wrapped heat kernel") {
  const Grid g = Grid::cube(1, 128);
  const double k = 4.0;
  const MollifierKernel kernel(g, k);
  const double h = g.spacing(0);
  const double var = 2.0 / k;
  std::vector<double> direct(128);
  double total = 0.0;
  for (std::size_t j = 0; j < 128; ++j) {
    double s = 0.0;
    for (int m = -20; m <= 20; ++m) {
      const double x = j * h + m * 2 * kPi;
      s += std::exp(-x * x / (2 * var));
    }
    direct[j] = s;
    total += s;
  }
  for (std::size_t j = 0; j < 128; ++j) CHECK(std::abs(kernel.weights(0)[j] - direct[j] / total) <= 1e-15);
}

TEST_CASE("convolution of zero and of quadratics") {
  const Grid g = Grid::cube(2, 32);
  const ScalarField zero(g, SymMat::identity(2));
  const ScalarField out = convolve(zero, MollifierKernel(g, 4.0));
  CHECK(out.background() == SymMat::identity(2));
  for (double v : out.values()) CHECK(v == 0.0);
  const std::vector<double> ks{1.0, 4.0, 16.0};
  for (const auto& f : approx_sequence(zero, ks)) {
    CHECK(f.background() == zero.background());
    CHECK(sup_norm(f.values()) == 0.0);
  }
  CHECK(approx_sequence(zero, std::vector<double>{1.0}).size() == 1);
  CHECK_THROWS_AS(approx_sequence(zero, std::vector<double>{4.0, 1.0}), std::invalid_argument);
}

TEST_CASE("grid mismatch is rejected") {
  const ScalarField u(Grid::cube(1, 32), SymMat(1));
  CHECK_THROWS_AS(convolve(u, MollifierKernel(Grid::cube(1, 64), 4.0)), std::invalid_argument);
}

TEST_CASE("square-wave Hessian range is not enlarged by mollification") {
  const Grid g = Grid::cube(1, 128);
  const ScalarField u = c11_squarewave(g, 0.9);
  for (double k : {4.0, 16.0, 64.0}) {
    const Extrema e = hessian_extrema(convolve(u, MollifierKernel(g, k)));
    CHECK(e.min >= -0.9 - 1e-12);
    CHECK(e.max <= 0.9 + 1e-12);
  }
}

TEST_CASE("Hessian range contraction on random fields") {
  std::mt19937 rng(21);
  for (int n = 1; n <= 3; ++n) {
    const Grid g = Grid::cube(n, n == 3 ? 16 : 32);
    for (int trial = 0; trial < 4; ++trial) {
      const ScalarField u = random_smooth(g, rng, 6);
      const Extrema before = hessian_extrema(u);
      for (double k : {2.0, 8.0}) {
        const Extrema after = hessian_extrema(convolve(u, MollifierKernel(g, k)));
        CHECK(after.min >= before.min - 1e-10);
        CHECK(after.max <= before.max + 1e-10);
      }
    }
  }
}

TEST_CASE("semigroup property") {
  std::mt19937 rng(23);
  const Grid g = Grid::cube(2, 64);
  const ScalarField u = random_smooth(g, rng, 8);
  for (auto [a, b] : {std::pair{4.0, 16.0}, {16.0, 64.0}, {1.0, 3.0}}) {
    const ScalarField twice = convolve(convolve(u, MollifierKernel(g, a)), MollifierKernel(g, b));
    const ScalarField once = convolve(u, MollifierKernel(g, 1.0 / (1.0 / a + 1.0 / b)));
    CHECK(sup_distance(twice.values(), once.values()) <= 1e-12);
  }
}

TEST_CASE("supercritical data stays in the phase cone after mollification") {
  const Grid g = Grid::cube(2, 64);
  const SupercriticalResult s = supercritical(g, 1.2, 0.1, 0.05);
  for (double k : {1.0, 4.0, 16.0, 64.0}) {
    const ScalarField v = convolve(s.field, MollifierKernel(g, k));
    CHECK(phase_extrema(v).min >= kPi / 2 - 1e-10);
    CHECK(phase_extrema(v).min >= s.theta_min - 1e-10);
  }
}

TEST_CASE("gradients converge and third derivatives grow along the sequence") {
  const Grid g = Grid::cube(1, 256);
  const ScalarField u = c11_squarewave(g, 0.9);
  const std::vector<double> ks{4.0, 16.0, 64.0};
  const auto seq = approx_sequence(u, ks);
  const auto du = periodic_d1(g, u.values(), 0);
  double previous_distance = 1e300;
  double previous_d3 = 0.0;
  for (const auto& f : seq) {
    const double d = sup_distance(periodic_d1(g, f.values(), 0), du);
    CHECK(d < previous_distance);
    previous_distance = d;
    const double d3 = sup_d3_squared(f);
    CHECK(std::isfinite(d3));
    CHECK(d3 > previous_d3);  // longer kernel time, smaller D^3
    previous_d3 = d3;
  }
}
