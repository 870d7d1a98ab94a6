#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

#include "lmcf/symmat.hpp"

namespace lmcf {

/// Smallest admissible number of points per axis.
inline constexpr std::size_t kMinPointsPerAxis = 16;

/// Periodic tensor grid on [0, L_0) x ... x [0, L_{n-1}). Flat indices are
/// row-major: the last axis varies fastest.
class Grid {
 public:
  Grid(int dim, std::vector<std::size_t> points, std::vector<double> lengths);

  /// Same resolution and length on every axis (default length 2 pi).
  static Grid cube(int dim, std::size_t points, double length = 2 * std::numbers::pi);

  int dim() const { return dim_; }
  std::size_t points(int axis) const { return points_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / static_cast<double>(points_[axis]); }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::array<std::size_t, kMaxDim> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<std::size_t, kMaxDim>& index) const;
  /// Physical coordinate x_j = i_j * spacing_j of a grid point.
  std::array<double, kMaxDim> coordinate(std::size_t flat) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  std::array<std::size_t, kMaxDim> points_{1, 1, 1};
  std::array<double, kMaxDim> lengths_{1.0, 1.0, 1.0};
  std::array<std::size_t, kMaxDim> strides_{1, 1, 1};
  std::size_t size_ = 1;
};

/// u(x) = x.S.x / 2 + phi(x): constant quadratic background plus periodic part.
/// The periodic part is kept at zero mean.
class ScalarField {
 public:
  ScalarField(Grid grid, SymMat background);
  /// Takes ownership of phi and removes its mean.
  ScalarField(Grid grid, SymMat background, std::vector<double> phi);

  const Grid& grid() const { return grid_; }
  const SymMat& background() const { return background_; }
  std::span<const double> values() const { return phi_; }
  /// Mutable access to the periodic part; the size must not change.
  std::vector<double>& mutable_values() { return phi_; }

  /// Subtracts the spatial mean of phi and returns it.
  double remove_mean();
  /// x.S.x / 2 at a grid point.
  double background_value(std::size_t flat) const;

 private:
  Grid grid_;
  SymMat background_;
  std::vector<double> phi_;
};

/// f(x) = S x + psi(x) with psi periodic, one component per axis.
class VectorField {
 public:
  VectorField(Grid grid, SymMat background);
  VectorField(Grid grid, SymMat background, std::vector<std::vector<double>> components);

  const Grid& grid() const { return grid_; }
  const SymMat& background() const { return background_; }
  int components() const { return grid_.dim(); }
  std::span<const double> component(int a) const { return psi_[a]; }
  std::vector<double>& mutable_component(int a) { return psi_[a]; }

 private:
  Grid grid_;
  SymMat background_;
  std::vector<std::vector<double>> psi_;
};

/// Partial derivative described by per-axis orders, e.g. {2, 0} for d^2/dx0^2.
struct MultiIndex {
  std::array<int, kMaxDim> order{0, 0, 0};

  /// Builds the index from a list of axes: axes({0, 1}) is d^2/dx0 dx1.
  static MultiIndex axes(std::initializer_list<int> list);
  int total() const { return order[0] + order[1] + order[2]; }
};

/// Fourth-order centered first derivative along an axis, periodic wrap.
std::vector<double> periodic_d1(const Grid& grid, std::span<const double> f, int axis);
/// Fourth-order centered second derivative along an axis, periodic wrap.
std::vector<double> periodic_d2(const Grid& grid, std::span<const double> f, int axis);

/// Derivative of a periodic array. Per-axis order 1 uses the first-derivative
/// stencil, order 2 the second-derivative stencil and order 3 composes the two.
std::vector<double> periodic_derivative(const Grid& grid, std::span<const double> f,
                                        const MultiIndex& index);

/// Derivative of the full function u including the quadratic background.
/// Order 0 returns u itself. Throws std::invalid_argument for total order > 3
/// or for an axis beyond the grid dimension.
std::vector<double> derivative(const ScalarField& field, const MultiIndex& index);

/// Number of independent entries of an n x n symmetric matrix.
constexpr int packed_size(int n) { return n * (n + 1) / 2; }
/// Position of (i, j), i <= j, in packed upper-triangle order.
constexpr int packed_index(int n, int i, int j) {
  if (i > j) {
    const int t = i;
    i = j;
    j = t;
  }
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// D^2 phi stored as one array per packed (i, j) entry; each mixed partial is
/// computed once.
struct PackedHessian {
  int dim = 1;
  std::vector<std::vector<double>> entries;

  /// S + D^2 phi at one point.
  SymMat at(std::size_t flat, const SymMat& background) const;
};

PackedHessian periodic_hessian(const Grid& grid, std::span<const double> phi);

struct HessianField {
  Grid grid;
  std::vector<SymMat> at;
};

HessianField hessian(const ScalarField& field);

/// Du = S x + D phi.
VectorField gradient(const ScalarField& field);

double sup_norm(std::span<const double> values);
double oscillation(std::span<const double> values);

}  // namespace lmcf
