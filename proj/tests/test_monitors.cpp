#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "lmcf/initial.hpp"
#include "lmcf/monitors.hpp"
#include "support.hpp"

using namespace lmcf;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<FlowState> trajectory(const ScalarField& u0, double t_end, double cadence) {
  StepperConfig c;
  c.t_end = t_end;
  c.cadence = cadence;
  return evolve(u0, c);
}
}  // namespace

TEST_CASE("extrema of quadratic and sine data") {
  const std::vector<double> d{2.0, -0.5};
  const ScalarField q(Grid::cube(2, 16), SymMat::diagonal(d));
  const Extrema e = hessian_extrema(q);
  CHECK(e.min == -0.5);
  CHECK(e.max == 2.0);
  const Extrema ph = phase_extrema(q);
  CHECK(ph.min == doctest::Approx(std::atan(2.0) + std::atan(-0.5)));
  CHECK(ph.max == ph.min);

  const ScalarField s = trig(Grid::cube(1, 128), SymMat(1), {{0.5, {1, 0, 0}, 0.0}});
  CHECK(std::abs(hessian_extrema(s).min + 0.5) <= 1e-6);
  CHECK(std::abs(hessian_extrema(s).max - 0.5) <= 1e-6);
}

TEST_CASE("third derivatives and their squared sup with multiplicities") {
  const Grid g = Grid::cube(2, 64);
  const ScalarField u = trig(g, SymMat::identity(2), {{0.2, {1, 2, 0}, 0.4}});
  const ThirdDerivatives d3 = third_derivatives(u);
  REQUIRE(d3.entries.size() == 4);  // xxx, xxy, xyy, yyy
  CHECK(d3.at(5, 1, 0, 1) == d3.at(5, 0, 1, 1));
  CHECK(d3.at(5, 1, 1, 0) == d3.at(5, 0, 1, 1));
  // u_ijk = -0.2 k_i k_j k_k cos(k.x + phase); the full sum is 0.04 |k|^6 cos^2.
  const double expected = 0.04 * std::pow(5.0, 3);
  CHECK(std::abs(sup_d3_squared(u) - expected) <= 1e-3 * expected);
  double brute = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) s += d3.at(p, i, j, k) * d3.at(p, i, j, k);
    brute = std::max(brute, s);
  }
  CHECK(sup_d3_squared(u) == doctest::Approx(brute).epsilon(1e-13));
  CHECK(sup_d3_squared(ScalarField(g, SymMat::identity(2))) == 0.0);
}

TEST_CASE("1D second fundamental form") {
  const Grid g = Grid::cube(1, 256);
  const ScalarField u = trig(g, SymMat::scalar(1, 0.3), {{0.3, {1, 0, 0}, 0.0}});
  const CurvatureNorm a = curvature_norm(u);
  double worst = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double x = g.coordinate(p)[0];
    const double w2 = 0.3 - 0.3 * std::sin(x);
    const double w3 = -0.3 * std::cos(x);
    worst = std::max(worst, std::abs(a.values[p] - w3 * w3 / std::pow(1 + w2 * w2, 3)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("curvature norm is invariant under the eigenframe and bounded by the flat norm") {
  const Grid g = Grid::cube(3, 16);
  const ScalarField u = trig(g, SymMat::identity(3), {{0.05, {1, 1, 0}, 0.0}, {0.05, {0, 1, 1}, 1.0},
                                                      {0.05, {1, 0, 1}, 2.0}});
  const CurvatureNorm a = curvature_norm(u);
  const ThirdDerivatives d3 = third_derivatives(u);
  const HessianField h = hessian(u);
  for (std::size_t p = 0; p < g.size(); p += 97) {
    // Oracle: g^{-1} = (I + H^2)^{-1} contracted on all three slots.
    SymMat m = SymMat::identity(3);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double s = (i == j) ? 1.0 : 0.0;
        for (int k = 0; k < 3; ++k) s += h.at[p](i, k) * h.at[p](k, j);
        m.set(i, j, s);
      }
    const SymMat gi = inverse(m);
    double sum = 0.0, flat = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          flat += d3.at(p, i, j, k) * d3.at(p, i, j, k);
          for (int l = 0; l < 3; ++l)
            for (int mm = 0; mm < 3; ++mm)
              for (int q = 0; q < 3; ++q)
                sum += gi(i, l) * gi(j, mm) * gi(k, q) * d3.at(p, i, j, k) * d3.at(p, l, mm, q);
        }
    CHECK(a.values[p] == doctest::Approx(sum).epsilon(1e-10));
    CHECK(a.values[p] <= flat + 1e-14);
  }
}

TEST_CASE("gradient oscillation ignores the background") {
  const Grid g = Grid::cube(2, 64);
  CHECK(gradient_oscillation(ScalarField(g, SymMat::identity(2))) == 0.0);
  const ScalarField u = trig(g, SymMat::identity(2), {{0.5, {1, 0, 0}, 0.0}});
  CHECK(std::abs(gradient_oscillation(u) - 1.0) <= 1e-4);
}

TEST_CASE("split detection") {
  const Grid g = Grid::cube(2, 64);
  const ScalarField u = split(g, 0, 1.0, {{0.1, {0, 1, 0}, 0.0}});
  const auto dirs = splitting_detect(u, 1e-10);
  REQUIRE(dirs.size() == 1);
  CHECK(dirs[0].axis == 0);
  CHECK(std::abs(dirs[0].pinned_value - 1.0) <= 1e-10);
  const auto res = split_residuals(u);
  CHECK(res[0] <= 1e-12);
  CHECK(res[1] > 0.1);

  const ScalarField generic = trig(g, SymMat::identity(2), {{0.1, {1, 1, 0}, 0.0}});
  CHECK(splitting_detect(generic, 1e-6).empty());
}

TEST_CASE("audits on quadratic data report nothing") {
  const auto traj = trajectory(ScalarField(Grid::cube(1, 32), SymMat::identity(1)), 1.0, 0.25);
  MonitorRecorder rec;
  for (const auto& s : traj) rec.record(s);
  const auto& r = rec.records();
  REQUIRE(r.size() == 5);
  const MaxPrincipleReport mp = max_principle_audit(r);
  CHECK(mp.theta_min_drop == 0.0);
  CHECK(mp.theta_max_rise == 0.0);
  CHECK(mp.range_growth == 0.0);
  const DecayReport dr = decay_audit(r, 0.0);
  CHECK(dr.observed_constant == 0.0);
  CHECK(dr.bounded);
  CHECK(dr.monotone_violation == 0.0);
  CHECK(holder_audit(r, 0.25) == 0.0);
  const ConvexityReport cv = convexity_audit(r, 1e-6);
  CHECK(cv.applicable);
  CHECK(cv.ok);
  for (const auto& m : r) {
    CHECK(m.ty_ii_ok);
    CHECK(m.osc_grad == 0.0);
  }
}

TEST_CASE("convexity audit does not apply to non-convex data") {
  std::vector<MonitorRecord> r(2);
  r[0].lambda_min = -0.5;
  r[1].lambda_min = -0.7;
  const ConvexityReport cv = convexity_audit(r, 1e-6);
  CHECK_FALSE(cv.applicable);
  CHECK(cv.ok);
  r[0].lambda_min = 0.0;
  CHECK_FALSE(convexity_audit(r, 1e-6).ok);
}

TEST_CASE("max principle on smooth data") {
  const ScalarField u = trig(Grid::cube(1, 128), SymMat(1), {{0.5, {1, 0, 0}, 0.0}});
  MonitorRecorder rec;
  for (const auto& s : trajectory(u, 0.5, 0.05)) rec.record(s);
  const MaxPrincipleReport mp = max_principle_audit(rec.records());
  CHECK(mp.theta_min_drop <= 1e-8);
  CHECK(mp.theta_max_rise <= 1e-8);
  CHECK(mp.range_growth <= 1e-8);
  for (const auto& m : rec.records()) CHECK(m.ty_ii_ok);
}

TEST_CASE("holder ratio against an explicit oracle") {
  const Grid g = Grid::cube(1, 64);
  const ScalarField u = trig(g, SymMat(1), {{0.3, {1, 0, 0}, 0.0}});
  const auto traj = trajectory(u, 0.2, 0.05);
  double oracle = 0.0;
  for (std::size_t a = 0; a < traj.size(); ++a)
    for (std::size_t b = a + 1; b < traj.size(); ++b) {
      const auto da = periodic_d1(g, traj[a].field.values(), 0);
      const auto db = periodic_d1(g, traj[b].field.values(), 0);
      double d = 0.0;
      for (std::size_t p = 0; p < g.size(); ++p) d = std::max(d, std::abs(da[p] - db[p]));
      oracle = std::max(oracle, d / std::sqrt(traj[b].time - traj[a].time));
    }
  CHECK(holder_ratio_sup(traj, 0.25) == doctest::Approx(oracle).epsilon(1e-12));
  MonitorRecorder rec;
  for (const auto& s : traj) rec.record(s);
  CHECK(rec.records().back().holder_ratio == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(holder_audit(rec.records(), 0.25) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("decay audit on hand-built records") {
  std::vector<MonitorRecord> r(5);
  const double scaled[] = {0.0, 1.0, 0.9, 0.8, 0.85};
  for (int i = 0; i < 5; ++i) {
    r[i].t = 0.25 * i;
    r[i].scaled_d3 = scaled[i];
  }
  const DecayReport d = decay_audit(r, 0.0, 0.5);
  CHECK(d.observed_constant == 1.0);
  CHECK(d.bounded);
  CHECK(d.monotone_violation == doctest::Approx(0.05 / 0.8));
  r[4].scaled_d3 = 2.0;
  CHECK_FALSE(decay_audit(r, 0.0, 0.5).bounded);
}

TEST_CASE("monitor csv layout") {
  std::vector<MonitorRecord> r(1);
  r[0].t = 0.5;
  r[0].convex_ok = false;
  std::ostringstream out;
  write_monitor_csv(out, r);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == kMonitorCsvHeader);
  int commas = 0;
  for (char ch : row) commas += ch == ',';
  CHECK(commas == 13);
  CHECK(row.find(",1,0,") != std::string::npos);
}

TEST_CASE("pair condition is frame independent") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::array<double, kMaxDim> ev{u(rng), u(rng), u(rng)};
    const SymMat m = testing::conjugate(testing::random_orthogonal(3, rng), ev, 3);
    double oracle = 1e300;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) oracle = std::min(oracle, 3.0 + ev[i] * ev[i] + 2.0 * ev[i] * ev[j]);
    CHECK(std::abs(ty_condition_ii_value(m) - oracle) <= 1e-10);
    if (std::abs(oracle) > 1e-9) CHECK(ty_condition_ii(m) == (oracle >= 0.0));
  }
}

TEST_CASE("evaluate_monitors respects disabled options") {
  MonitorOptions off;
  off.third_derivatives = false;
  off.curvature = false;
  off.split = false;
  const ScalarField u = trig(Grid::cube(2, 32), SymMat(2), {{0.3, {1, 1, 0}, 0.0}});
  const MonitorRecord m = evaluate_monitors(FlowState(u), off);
  CHECK(m.sup_d3_sq == 0.0);
  CHECK(m.a_sq_max == 0.0);
  CHECK(m.split_residuals.empty());
  const MonitorRecord full = evaluate_monitors(FlowState(u));
  CHECK(full.sup_d3_sq > 0.0);
  CHECK(full.a_sq_max > 0.0);
  CHECK(full.a_sq_max <= full.sup_d3_sq * (1 + 1e-12));
  CHECK(full.theta_min <= full.theta_max);
}
