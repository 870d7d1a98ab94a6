#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmcf/grid.hpp"

namespace lmcf {

class RotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min over grid points of lambda_min(cos(sigma) I + sin(sigma) D^2 u).
struct GraphMargin {
  double value = 0.0;
  std::size_t location = 0;
};

GraphMargin graph_condition_margin(const ScalarField& field, double sigma);

/// A validated rotation of a graph potential.
struct RotationPlan {
  double sigma = 0.0;
  GraphMargin margin;
  SymMat rotated_background;
  /// Lengths of the rotated fundamental domain, (cos sigma + sin sigma S_jj) L_j.
  std::vector<double> rotated_lengths;
};

/// Checks the graph condition and the angle margin of every eigenvalue.
/// Throws RotationError naming the worst point when the rotated surface
/// would not be a graph, and std::invalid_argument for non-diagonal
/// backgrounds in dimension >= 2.
RotationPlan plan_rotation(const ScalarField& field, double sigma);

struct RotationReport {
  RotationPlan plan;
  int max_newton_iterations = 0;
  /// Curl of the resampled gradient on the target grid.
  double curl_residual = 0.0;
  /// Largest disagreement between the axis orderings of the path integration.
  double path_spread = 0.0;
  /// max over target points and i of
  /// |arctan lambda_i(D^2 v)(r) - (arctan lambda_i(D^2 u)(x(r)) - sigma)|.
  double spectral_defect = 0.0;
};

struct RotationResult {
  ScalarField field;
  RotationReport report;
  /// Source point x(r) for every target grid point r (flat index order).
  std::vector<std::array<double, kMaxDim>> preimages;
};

/// Represents the Lagrangian graph of u in the coordinates w = e^{-i sigma} z.
/// The new potential lives on a regular grid over the transformed fundamental
/// domain with the same point count.
RotationResult rotate_field_with_report(const ScalarField& field, double sigma);
ScalarField rotate_field(const ScalarField& field, double sigma);

/// Periodic potential whose gradient best matches g: spectral antiderivatives
/// along grid lines, combined along every axis ordering of the path from the
/// origin and averaged. Result has zero mean. spread receives the largest
/// difference between orderings when non-null.
std::vector<double> integrate_periodic_gradient(const Grid& grid,
                                                const std::vector<std::vector<double>>& g,
                                                double* spread = nullptr);

/// Tensor-product periodic Lagrange interpolation with eight nodes per axis.
class PeriodicInterpolator {
 public:
  static constexpr int kNodes = 8;

  explicit PeriodicInterpolator(const Grid& grid) : grid_(grid) {}

  /// Interpolates each of the given arrays at the physical point x.
  void evaluate(const std::array<double, kMaxDim>& x,
                const std::vector<std::span<const double>>& fields,
                std::span<double> out) const;

 private:
  Grid grid_;
};

}  // namespace lmcf
