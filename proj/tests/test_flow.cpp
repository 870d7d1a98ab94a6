#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lmcf/flow.hpp"
#include "lmcf/initial.hpp"

using namespace lmcf;

namespace {
constexpr double kPi = std::numbers::pi;

ScalarField sine_data(const Grid& g, double amplitude, const SymMat& bg) {
  return trig(g, bg, {{amplitude, {1, 0, 0}, 0.0}});
}

StepperConfig config(double t_end, double cadence = 0.0) {
  StepperConfig c;
  c.t_end = t_end;
  c.cadence = cadence;
  return c;
}
}  // namespace

TEST_CASE("rhs examples") {
  const auto q = rhs_potential(ScalarField(Grid::cube(1, 32), SymMat::identity(1)));
  for (double v : q) CHECK(v == doctest::Approx(kPi / 4).epsilon(1e-15));
  const auto z = rhs_potential(ScalarField(Grid::cube(2, 16), SymMat(2)));
  for (double v : z) CHECK(v == 0.0);

  const Grid g = Grid::cube(1, 128);
  const auto r = rhs_potential(sine_data(g, 0.1, SymMat(1)));
  CHECK(std::abs(r[32] - std::atan(-0.1)) <= 1e-6);  // x = pi / 2
}

TEST_CASE("rhs stays inside the theta range") {
  const Grid g = Grid::cube(2, 32);
  const auto u = trig(g, SymMat(2), {{5.0, {1, 2, 0}, 0.3}, {3.0, {3, 1, 0}, 1.0}});
  for (double v : rhs_potential(u)) CHECK(std::abs(v) < rhs_bound(2));
}

TEST_CASE("cfl_dt examples") {
  const double h = 2 * kPi / 256;
  CHECK(cfl_dt(Grid::cube(1, 256), 0.25) == doctest::Approx(0.25 * h * h / (8.0 / 3.0)));
  CHECK(cfl_dt(Grid::cube(1, 256), 0.25) == doctest::Approx(5.65e-5).epsilon(1e-3));
  const double h2 = 2 * kPi / 64;
  CHECK(cfl_dt(Grid::cube(2, 64), 1.0) == doctest::Approx(h2 * h2 * 3.0 / 16.0));
  StepperConfig bad;
  bad.cfl_safety = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.cfl_safety = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("quadratic data evolves by a constant") {
  for (int n = 1; n <= 2; ++n) {
    const auto traj = evolve(ScalarField(Grid::cube(n, 32), SymMat::identity(n)), config(2.0, 0.5));
    REQUIRE(traj.size() == 5);
    for (const auto& s : traj) {
      CHECK(sup_norm(s.field.values()) == 0.0);
      CHECK(std::abs(s.offset - s.time * n * kPi / 4) <= 1e-12);
    }
    CHECK(traj.back().time == 2.0);
  }
}

TEST_CASE("evolve to t_end = 0 returns the initial state") {
  const auto traj = evolve(sine_data(Grid::cube(1, 32), 0.1, SymMat(1)), config(0.0));
  REQUIRE(traj.size() == 1);
  CHECK(traj[0].time == 0.0);
  CHECK(traj[0].step_count == 0);
}

TEST_CASE("step keeps zero mean and small sine data decays") {
  const Grid g = Grid::cube(1, 128);
  FlowState s(sine_data(g, 0.1, SymMat(1)));
  const double dt = cfl_dt(g, 0.5);
  for (int i = 0; i < 50; ++i) {
    s = step(s, dt);
    double m = 0.0;
    for (double v : s.field.values()) m += v;
    CHECK(std::abs(m / g.size()) <= 1e-13);
  }
  const auto traj = evolve(sine_data(g, 0.1, SymMat(1)), config(1.0));
  const double sup0 = sup_norm(traj.front().field.values());
  const double sup1 = sup_norm(traj.back().field.values());
  CHECK(sup1 < sup0);
  CHECK(sup1 / sup0 == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("offset moves no faster than the theta range allows") {
  const Grid g = Grid::cube(2, 32);
  const auto u = trig(g, SymMat::identity(2), {{0.3, {1, 1, 0}, 0.0}});
  const auto traj = evolve(u, config(0.5, 0.05));
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(traj[i].time > traj[i - 1].time);
    CHECK(std::abs(traj[i].offset - traj[i - 1].offset) <=
          rhs_bound(2) * (traj[i].time - traj[i - 1].time));
  }
}

TEST_CASE("cadence samples land exactly and runs are deterministic") {
  const Grid g = Grid::cube(1, 64);
  const auto a = evolve(sine_data(g, 0.2, SymMat(1)), config(0.3, 0.1));
  const auto b = evolve(sine_data(g, 0.2, SymMat(1)), config(0.3, 0.1));
  REQUIRE(a.size() == 4);
  CHECK(a[1].time == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(a[3].time == 0.3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].offset == b[i].offset);
    for (std::size_t p = 0; p < g.size(); ++p) CHECK(a[i].field.values()[p] == b[i].field.values()[p]);
  }
}

TEST_CASE("hooks see every sample") {
  int calls = 0;
  StepperConfig c = config(0.2, 0.05);
  c.keep_samples = false;
  const auto traj =
      evolve(sine_data(Grid::cube(1, 32), 0.1, SymMat(1)), c, [&](const FlowState&) { ++calls; });
  CHECK(calls == 5);
  CHECK(traj.size() == 2);
}

TEST_CASE("non-finite data aborts with the last good state") {
  const Grid g = Grid::cube(1, 32);
  std::vector<double> phi(g.size(), 0.0);
  phi[3] = std::numeric_limits<double>::quiet_NaN();
  ScalarField u(g, SymMat(1));
  u.mutable_values() = phi;
  try {
    (void)step(FlowState(u), 1e-4);
    FAIL("expected an abort");
  } catch (const NumericalAbort& e) {
    CHECK(e.last_good().time == 0.0);
  }
}

TEST_CASE("convergence under refinement against a fine reference") {
  auto final_values = [](std::size_t n) {
    const auto traj = evolve(sine_data(Grid::cube(1, n), 0.5, SymMat(1)), config(0.5));
    return traj.back().field;
  };
  const ScalarField ref = final_values(256);
  auto error = [&](const ScalarField& f) {
    const std::size_t stride = 256 / f.grid().points(0);
    double e = 0.0;
    for (std::size_t p = 0; p < f.grid().size(); ++p)
      e = std::max(e, std::abs(f.values()[p] - ref.values()[p * stride]));
    return e;
  };
  const double e32 = error(final_values(32));
  const double e64 = error(final_values(64));
  CHECK(e32 / e64 >= 8.0);
}

TEST_CASE("gmcf oracle: linear data is stationary") {
  const Grid g = Grid::cube(1, 32);
  const VectorField f0 = gradient(ScalarField(g, SymMat::identity(1)));
  const auto traj = gmcf_evolve(f0, config(1.0));
  for (double v : traj.back().field.component(0)) CHECK(v == 0.0);
}

TEST_CASE("gmcf oracle agrees with the potential gradient") {
  const Grid g = Grid::cube(1, 128);
  const ScalarField u0 = sine_data(g, 0.1, SymMat::identity(1));
  const auto pot = evolve(u0, config(0.5));
  const auto orc = gmcf_evolve(gradient(u0), config(0.5));
  const VectorField du = gradient(pot.back().field);
  double e = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    e = std::max(e, std::abs(du.component(0)[p] - orc.back().field.component(0)[p]));
  CHECK(e <= 1e-6);
}

TEST_CASE("gmcf keeps gradient data curl free") {
  // The discrete curl drifts at the truncation order of the stencils.
  double previous = 0.0;
  for (std::size_t n : {64ul, 128ul}) {
    const Grid g = Grid::cube(2, n);
    const ScalarField u0 =
        trig(g, SymMat::identity(2), {{0.2, {1, 1, 0}, 0.0}, {0.1, {0, 1, 0}, 0.5}});
    CHECK(curl_residual(gradient(u0)) <= 1e-12);
    double worst = 0.0;
    for (const auto& s : gmcf_evolve(gradient(u0), config(0.5, 0.1)))
      worst = std::max(worst, curl_residual(s.field));
    if (previous > 0) CHECK(previous / worst >= 12.0);
    previous = worst;
  }
  CHECK(previous <= 1e-8);
}
