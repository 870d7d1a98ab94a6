#pragma once

#include <array>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmcf {

inline constexpr int kMaxDim = 3;

/// Symmetric matrix of dimension 1..3. Storage is the full square so that
/// element access is branch free; every setter writes both triangles.
class SymMat {
 public:
  SymMat() : SymMat(1) {}
  explicit SymMat(int n);

  static SymMat identity(int n);
  static SymMat scalar(int n, double value);
  static SymMat diagonal(std::span<const double> entries);
  /// Throws std::invalid_argument if the input is not symmetric to 1e-12.
  static SymMat from_row_major(int n, std::span<const double> entries);

  int dim() const { return n_; }
  double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }
  void set(int i, int j, double value) {
    a_[i * kMaxDim + j] = value;
    a_[j * kMaxDim + i] = value;
  }

  std::vector<double> row_major() const;
  double max_abs() const;
  bool is_diagonal() const;
  double trace() const;

  SymMat& operator+=(const SymMat& other);
  SymMat& operator-=(const SymMat& other);
  SymMat& operator*=(double s);
  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  bool operator==(const SymMat& other) const = default;

 private:
  int n_;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

/// Dense n x n matrix (row-major), used for eigenvector frames.
struct SquareMat {
  int n = 1;
  std::array<double, kMaxDim * kMaxDim> a{};

  double operator()(int i, int j) const { return a[i * kMaxDim + j]; }
  double& operator()(int i, int j) { return a[i * kMaxDim + j]; }
  double determinant() const;
};

struct EigenSym {
  std::array<double, kMaxDim> values{};  // ascending
  SquareMat vectors;                     // column k pairs with values[k]
};

/// Eigen-decomposition of a symmetric matrix. Closed form for n <= 2, cyclic
/// Jacobi for n = 3. Eigenvalues ascending; each eigenvector has its
/// largest-magnitude component positive, except that the last column is
/// negated when needed to make det Q = +1.
EigenSym eigen_sym(const SymMat& m);

/// Eigenvalues only (ascending). Same algorithm as eigen_sym without the frame.
std::array<double, kMaxDim> eigenvalues(const SymMat& m);

/// Q diag(values) Q^T.
SymMat compose_spectral(const SquareMat& q, std::span<const double> values);

/// Inverse of a nonsingular symmetric matrix (cofactor formula).
SymMat inverse(const SymMat& m);

/// Lagrangian phase: sum of arctan of the eigenvalues.
double theta(const SymMat& m);

struct Metric {
  SymMat g;
  SymMat g_inverse;
};

/// Induced metric g = I + M^2 and its inverse.
Metric metric(const SymMat& m);

class GraphConditionError : public std::domain_error {
 public:
  GraphConditionError(const std::string& what, double eigenvalue)
      : std::domain_error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Distance from +-pi/2 that a rotated angle must keep.
inline constexpr double kRotationAngleMargin = 1e-8;

/// Action of the coordinate rotation z = e^{i sigma} w on a Hessian: each
/// eigenvalue maps to tan(arctan(lambda) - sigma) with the frame unchanged.
SymMat rotate_spectrum(const SymMat& m, double sigma);

/// Eigenvalue image of a single value under the rotation.
double rotate_eigenvalue(double lambda, double sigma);

/// sum arctan(lambda_i) >= (n - 2) pi / 2.
bool ty_condition_i(const SymMat& m);
/// min over ordered pairs (i, j) of 3 + lambda_i^2 + 2 lambda_i lambda_j.
double ty_condition_ii_value(const SymMat& m);
bool ty_condition_ii(const SymMat& m);

/// Set of symmetric matrices with theta(A) >= threshold.
class PhaseCone {
 public:
  PhaseCone(int n, double threshold);

  /// (n - 1) pi / 2.
  static PhaseCone supercritical(int n) {
    return PhaseCone(n, (n - 1) * std::numbers::pi / 2);
  }

  int dim() const { return n_; }
  double threshold() const { return threshold_; }
  bool contains(const SymMat& m) const;

 private:
  int n_;
  double threshold_;
};

/// theta(M) - threshold; non-negative iff M is in the cone.
double phase_gap(const SymMat& m, const PhaseCone& cone);

}  // namespace lmcf
