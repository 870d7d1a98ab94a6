#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmcf/grid.hpp"

namespace lmcf {

/// Raised when a builder cannot establish the property it promises.
class BuilderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// amplitude * sin(sum_j wave_j 2 pi x_j / L_j + phase).
struct TrigTerm {
  double amplitude = 0.0;
  std::array<int, kMaxDim> wave{0, 0, 0};
  double phase = 0.0;
};

/// u = x.S.x / 2.
ScalarField quadratic(const Grid& grid, const SymMat& background);

/// u = x.S.x / 2 + sum of trig terms. When hessian_bound is set the builder
/// checks that every discrete Hessian eigenvalue lies in [-bound, bound].
ScalarField trig(const Grid& grid, const SymMat& background, const std::vector<TrigTerm>& terms,
                 std::optional<double> hessian_bound = std::nullopt);

/// Relative overshoot of the discrete Hessian at the kinks of the square wave.
inline constexpr double kSquareWaveOvershoot = 0.15;

/// 1D C^{1,1} potential with u'' = a on [0, L/2) and -a on [L/2, L): u' is a
/// triangle wave and u is piecewise quadratic. Checks the discrete Hessian
/// stays within (1 + kSquareWaveOvershoot) |a|.
ScalarField c11_squarewave(const Grid& grid, double a);

/// Exact periodic part of the square-wave potential at x (for oracles).
double squarewave_potential(double x, double length, double a);

struct SupercriticalResult {
  ScalarField field;
  double epsilon = 0.0;  // perturbation size actually used
  double theta_min = 0.0;
  double lambda_min = 0.0;
};

/// 2D data S = c I plus eps (sin x + sin y + sin(x + y) / 2) in grid-scaled
/// coordinates. eps is halved until the discrete Hessian is convex and
/// theta >= pi / 2 + margin at every point. Requires 2 arctan(c) > pi / 2 + margin.
SupercriticalResult supercritical(const Grid& grid, double c, double epsilon, double margin);

/// Split data: background diag(pinned on `axis`, 0 elsewhere) plus terms that
/// do not depend on x_axis. Checks splitting_detect finds the axis.
ScalarField split(const Grid& grid, int axis, double pinned, const std::vector<TrigTerm>& terms);

}  // namespace lmcf
