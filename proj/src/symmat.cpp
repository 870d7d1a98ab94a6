#include "lmcf/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace lmcf {

namespace {

constexpr int kJacobiMaxSweeps = 30;
constexpr double kJacobiOffDiagonalTol = 1e-14;

void check_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw std::invalid_argument("matrix dimension must be 1..3, got " +
                                std::to_string(n));
  }
}

SquareMat identity_frame(int n) {
  SquareMat q;
  q.n = n;
  for (int i = 0; i < n; ++i) q(i, i) = 1.0;
  return q;
}

// Cyclic Jacobi on a full copy of m. Frame accumulated only when requested.
void jacobi(const SymMat& m, std::array<double, kMaxDim>& values, SquareMat* frame) {
  const int n = m.dim();
  double a[kMaxDim][kMaxDim];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m(i, j);
  if (frame) *frame = identity_frame(n);

  const double scale = std::max(m.max_abs(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::abs(a[p][q]);
    if (off <= kJacobiOffDiagonalTol * scale) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double th = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (th >= 0 ? 1.0 : -1.0) / (std::abs(th) + std::sqrt(th * th + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        if (frame) {
          for (int k = 0; k < n; ++k) {
            const double vkp = (*frame)(k, p);
            const double vkq = (*frame)(k, q);
            (*frame)(k, p) = c * vkp - s * vkq;
            (*frame)(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) values[i] = a[i][i];
}

// Closed form for 2x2; frame is the rotation by half the principal angle.
void closed_form_2(const SymMat& m, std::array<double, kMaxDim>& values, SquareMat* frame) {
  const double a = m(0, 0);
  const double b = m(0, 1);
  const double c = m(1, 1);
  if (b == 0.0) {
    values[0] = a;
    values[1] = c;
    if (frame) *frame = identity_frame(2);
    return;
  }
  const double mid = 0.5 * (a + c);
  const double r = std::hypot(0.5 * (a - c), b);
  values[0] = mid - r;
  values[1] = mid + r;
  if (frame) {
    const double phi = 0.5 * std::atan2(2.0 * b, a - c);
    const double cs = std::cos(phi);
    const double sn = std::sin(phi);
    frame->n = 2;
    (*frame)(0, 0) = -sn;
    (*frame)(1, 0) = cs;
    (*frame)(0, 1) = cs;
    (*frame)(1, 1) = sn;
  }
}

void sort_ascending(int n, std::array<double, kMaxDim>& values, SquareMat* frame) {
  std::array<int, kMaxDim> order{0, 1, 2};
  std::stable_sort(order.begin(), order.begin() + n,
                   [&](int x, int y) { return values[x] < values[y]; });
  std::array<double, kMaxDim> sorted{};
  SquareMat q;
  q.n = n;
  for (int k = 0; k < n; ++k) {
    sorted[k] = values[order[k]];
    if (frame)
      for (int i = 0; i < n; ++i) q(i, k) = (*frame)(i, order[k]);
  }
  values = sorted;
  if (frame) *frame = q;
}

void fix_signs(SquareMat& q) {
  const int n = q.n;
  for (int k = 0; k < n; ++k) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(q(i, k)) > std::abs(q(best, k))) best = i;
    if (q(best, k) < 0)
      for (int i = 0; i < n; ++i) q(i, k) = -q(i, k);
  }
  if (q.determinant() < 0)
    for (int i = 0; i < n; ++i) q(i, n - 1) = -q(i, n - 1);
}

void decompose(const SymMat& m, std::array<double, kMaxDim>& values, SquareMat* frame) {
  switch (m.dim()) {
    case 1:
      values[0] = m(0, 0);
      if (frame) *frame = identity_frame(1);
      return;
    case 2:
      closed_form_2(m, values, frame);
      break;
    default:
      jacobi(m, values, frame);
      break;
  }
  sort_ascending(m.dim(), values, frame);
}

}  // namespace

SymMat::SymMat(int n) : n_(n) { check_dim(n); }

SymMat SymMat::identity(int n) { return scalar(n, 1.0); }

SymMat SymMat::scalar(int n, double value) {
  SymMat m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, value);
  return m;
}

SymMat SymMat::diagonal(std::span<const double> entries) {
  SymMat m(static_cast<int>(entries.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, entries[i]);
  return m;
}

SymMat SymMat::from_row_major(int n, std::span<const double> entries) {
  check_dim(n);
  if (entries.size() != static_cast<std::size_t>(n * n)) {
    throw std::invalid_argument("expected " + std::to_string(n * n) +
                                " matrix entries, got " + std::to_string(entries.size()));
  }
  SymMat m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double upper = entries[i * n + j];
      const double lower = entries[j * n + i];
      if (std::abs(upper - lower) > 1e-12 * (1.0 + std::abs(upper))) {
        throw std::invalid_argument("matrix is not symmetric");
      }
      m.set(i, j, upper);
    }
  }
  return m;
}

std::vector<double> SymMat::row_major() const {
  std::vector<double> out(static_cast<std::size_t>(n_ * n_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out[i * n_ + j] = (*this)(i, j);
  return out;
}

double SymMat::max_abs() const {
  double r = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r = std::max(r, std::abs((*this)(i, j)));
  return r;
}

bool SymMat::is_diagonal() const {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if ((*this)(i, j) != 0.0) return false;
  return true;
}

double SymMat::trace() const {
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

SymMat& SymMat::operator+=(const SymMat& other) {
  if (other.n_ != n_) throw std::invalid_argument("dimension mismatch in SymMat +");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += other.a_[k];
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& other) {
  if (other.n_ != n_) throw std::invalid_argument("dimension mismatch in SymMat -");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= other.a_[k];
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

double SquareMat::determinant() const {
  const auto& m = *this;
  switch (n) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    default:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  }
}

EigenSym eigen_sym(const SymMat& m) {
  EigenSym e;
  decompose(m, e.values, &e.vectors);
  fix_signs(e.vectors);
  return e;
}

std::array<double, kMaxDim> eigenvalues(const SymMat& m) {
  std::array<double, kMaxDim> values{};
  decompose(m, values, nullptr);
  return values;
}

SymMat compose_spectral(const SquareMat& q, std::span<const double> values) {
  const int n = q.n;
  SymMat m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q(i, k) * values[k] * q(j, k);
      m.set(i, j, s);
    }
  }
  return m;
}

SymMat inverse(const SymMat& g) {
  const int n = g.dim();
  SymMat inv(n);
  if (n == 1) {
    inv.set(0, 0, 1.0 / g(0, 0));
  } else if (n == 2) {
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
    inv.set(0, 0, g(1, 1) / det);
    inv.set(1, 1, g(0, 0) / det);
    inv.set(0, 1, -g(0, 1) / det);
  } else {
    const double c00 = g(1, 1) * g(2, 2) - g(1, 2) * g(1, 2);
    const double c01 = g(0, 2) * g(1, 2) - g(0, 1) * g(2, 2);
    const double c02 = g(0, 1) * g(1, 2) - g(0, 2) * g(1, 1);
    const double c11 = g(0, 0) * g(2, 2) - g(0, 2) * g(0, 2);
    const double c12 = g(0, 1) * g(0, 2) - g(0, 0) * g(1, 2);
    const double c22 = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
    const double det = g(0, 0) * c00 + g(0, 1) * c01 + g(0, 2) * c02;
    inv.set(0, 0, c00 / det);
    inv.set(0, 1, c01 / det);
    inv.set(0, 2, c02 / det);
    inv.set(1, 1, c11 / det);
    inv.set(1, 2, c12 / det);
    inv.set(2, 2, c22 / det);
  }
  return inv;
}

double theta(const SymMat& m) {
  const auto values = eigenvalues(m);
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i) s += std::atan(values[i]);
  return s;
}

Metric metric(const SymMat& m) {
  const int n = m.dim();
  SymMat g = SymMat::identity(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m(i, k) * m(k, j);
      g.set(i, j, g(i, j) + s);
    }
  }
  const EigenSym e = eigen_sym(m);
  std::array<double, kMaxDim> inv{};
  for (int k = 0; k < n; ++k) inv[k] = 1.0 / (1.0 + e.values[k] * e.values[k]);
  return {g, compose_spectral(e.vectors, std::span(inv.data(), n))};
}

double rotate_eigenvalue(double lambda, double sigma) {
  const double angle = std::atan(lambda) - sigma;
  if (!(std::abs(angle) < std::numbers::pi / 2 - kRotationAngleMargin)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "rotation by sigma=" << sigma << " leaves the graph: eigenvalue " << lambda
        << " maps to angle " << angle;
    throw GraphConditionError(msg.str(), lambda);
  }
  return std::tan(angle);
}

SymMat rotate_spectrum(const SymMat& m, double sigma) {
  const EigenSym e = eigen_sym(m);
  std::array<double, kMaxDim> rotated{};
  for (int k = 0; k < m.dim(); ++k) rotated[k] = rotate_eigenvalue(e.values[k], sigma);
  return compose_spectral(e.vectors, std::span(rotated.data(), m.dim()));
}

bool ty_condition_i(const SymMat& m) {
  return theta(m) >= (m.dim() - 2) * std::numbers::pi / 2;
}

double ty_condition_ii_value(const SymMat& m) {
  const auto l = eigenvalues(m);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j)
      best = std::min(best, 3.0 + l[i] * l[i] + 2.0 * l[i] * l[j]);
  return best;
}

bool ty_condition_ii(const SymMat& m) { return ty_condition_ii_value(m) >= 0.0; }

PhaseCone::PhaseCone(int n, double threshold) : n_(n), threshold_(threshold) {
  check_dim(n);
  const double bound = n * std::numbers::pi / 2;
  if (!(threshold > -bound && threshold < bound)) {
    throw std::invalid_argument("phase cone threshold must lie in (-n pi/2, n pi/2)");
  }
}

bool PhaseCone::contains(const SymMat& m) const { return phase_gap(m, *this) >= 0.0; }

double phase_gap(const SymMat& m, const PhaseCone& cone) {
  if (m.dim() != cone.dim()) throw std::invalid_argument("phase cone dimension mismatch");
  return theta(m) - cone.threshold();
}

}  // namespace lmcf
