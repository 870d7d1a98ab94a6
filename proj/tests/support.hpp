#pragma once

#include <array>
#include <cmath>
#include <random>

#include "lmcf/symmat.hpp"

namespace lmcf::testing {

using Dense = std::array<std::array<double, kMaxDim>, kMaxDim>;

inline Dense random_orthogonal(int n, std::mt19937& rng) {
  std::normal_distribution<double> normal;
  Dense q{};
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) q[r][c] = normal(rng);
    for (int p = 0; p < c; ++p) {
      double dot = 0.0;
      for (int r = 0; r < n; ++r) dot += q[r][c] * q[r][p];
      for (int r = 0; r < n; ++r) q[r][c] -= dot * q[r][p];
    }
    double norm = 0.0;
    for (int r = 0; r < n; ++r) norm += q[r][c] * q[r][c];
    for (int r = 0; r < n; ++r) q[r][c] /= std::sqrt(norm);
  }
  return q;
}

/// Q diag(values) Q^T by explicit sums.
inline SymMat conjugate(const Dense& q, const std::array<double, kMaxDim>& values, int n) {
  SymMat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q[i][k] * values[k] * q[j][k];
      m.set(i, j, s);
    }
  return m;
}

/// Q M Q^T.
inline SymMat conjugate(const Dense& q, const SymMat& m) {
  const int n = m.dim();
  SymMat out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += q[i][a] * m(a, b) * q[j][b];
      out.set(i, j, s);
    }
  return out;
}

inline SymMat random_symmetric(int n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  SymMat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, u(rng));
  return m;
}

}  // namespace lmcf::testing
