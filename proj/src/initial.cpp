#include "lmcf/initial.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lmcf/monitors.hpp"

namespace lmcf {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sample_terms(const Grid& grid, const std::vector<TrigTerm>& terms) {
  std::vector<double> phi(grid.size(), 0.0);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto x = grid.coordinate(p);
    double v = 0.0;
    for (const auto& t : terms) {
      double arg = t.phase;
      for (int j = 0; j < grid.dim(); ++j) arg += t.wave[j] * 2 * kPi * x[j] / grid.length(j);
      v += t.amplitude * std::sin(arg);
    }
    phi[p] = v;
  }
  return phi;
}

}  // namespace

ScalarField quadratic(const Grid& grid, const SymMat& background) {
  return ScalarField(grid, background);
}

ScalarField trig(const Grid& grid, const SymMat& background, const std::vector<TrigTerm>& terms,
                 std::optional<double> hessian_bound) {
  ScalarField u(grid, background, sample_terms(grid, terms));
  if (hessian_bound) {
    const Extrema e = hessian_extrema(u);
    if (e.min < -*hessian_bound || e.max > *hessian_bound) {
      throw BuilderError("trig data has Hessian range [" + std::to_string(e.min) + ", " +
                         std::to_string(e.max) + "] outside +-" + std::to_string(*hessian_bound));
    }
  }
  return u;
}

double squarewave_potential(double x, double length, double a) {
  x = std::fmod(x, length);
  if (x < 0) x += length;
  if (x <= 0.5 * length) return a * (0.5 * x * x - 0.25 * length * x);
  return a * (0.75 * length * x - 0.5 * x * x) - 0.25 * a * length * length;
}

ScalarField c11_squarewave(const Grid& grid, double a) {
  if (grid.dim() != 1) throw BuilderError("square-wave data is one-dimensional");
  if (grid.points(0) % 2 != 0) throw BuilderError("square-wave data needs an even point count");
  std::vector<double> phi(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    phi[p] = squarewave_potential(grid.coordinate(p)[0], grid.length(0), a);
  ScalarField u(grid, SymMat(1), std::move(phi));
  const Extrema e = hessian_extrema(u);
  const double bound = (1 + kSquareWaveOvershoot) * std::abs(a);
  if (e.min < -bound || e.max > bound) {
    throw BuilderError("square-wave Hessian overshoot exceeds " + std::to_string(bound));
  }
  return u;
}

SupercriticalResult supercritical(const Grid& grid, double c, double epsilon, double margin) {
  if (grid.dim() != 2) throw BuilderError("supercritical data is two-dimensional");
  if (!(2 * std::atan(c) > kPi / 2 + margin)) {
    throw BuilderError("background c I is not supercritical with the requested margin");
  }
  const std::vector<TrigTerm> shape{
      {1.0, {1, 0, 0}, 0.0}, {1.0, {0, 1, 0}, 0.0}, {0.5, {1, 1, 0}, 0.0}};
  const std::vector<double> base = sample_terms(grid, shape);
  double eps = epsilon;
  for (int attempt = 0; attempt < 60; ++attempt) {
    std::vector<double> phi(base);
    for (double& v : phi) v *= eps;
    ScalarField u(grid, SymMat::scalar(2, c), std::move(phi));
    const Extrema th = phase_extrema(u);
    const Extrema ev = hessian_extrema(u);
    if (th.min >= kPi / 2 + margin && ev.min >= 0.0) {
      return {std::move(u), eps, th.min, ev.min};
    }
    eps *= 0.5;
  }
  throw BuilderError("could not reach the supercritical margin");
}

ScalarField split(const Grid& grid, int axis, double pinned, const std::vector<TrigTerm>& terms) {
  if (axis < 0 || axis >= grid.dim()) throw BuilderError("split axis out of range");
  for (const auto& t : terms) {
    if (t.wave[axis] != 0) throw BuilderError("split terms must not depend on the pinned axis");
  }
  SymMat s(grid.dim());
  s.set(axis, axis, pinned);
  ScalarField u(grid, s, sample_terms(grid, terms));
  for (const auto& d : splitting_detect(u, 1e-10)) {
    if (d.axis == axis && std::abs(d.pinned_value - pinned) <= 1e-10) return u;
  }
  throw BuilderError("split structure not detected on axis " + std::to_string(axis));
}

}  // namespace lmcf
