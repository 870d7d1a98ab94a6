#include "lmcf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lmcf/parallel.hpp"

namespace lmcf {

namespace {

// Applies a five-point periodic stencil along one axis. kernel receives a
// pointer to the centre of a ghost-padded copy of the line.
template <class Kernel>
void sweep_axis(const Grid& grid, std::span<const double> in, std::span<double> out,
                int axis, Kernel kernel) {
  const std::size_t n = grid.points(axis);
  const std::size_t s = grid.stride(axis);
  const std::size_t block = n * s;
  const std::size_t lines = grid.size() / n;
  parallel_for(lines, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(n + 4);
    for (std::size_t line = begin; line < end; ++line) {
      const std::size_t base = (line / s) * block + (line % s);
      for (std::size_t k = 0; k < n; ++k) buf[k + 2] = in[base + k * s];
      buf[0] = buf[n];
      buf[1] = buf[n + 1];
      buf[n + 2] = buf[2];
      buf[n + 3] = buf[3];
      for (std::size_t k = 0; k < n; ++k) out[base + k * s] = kernel(&buf[k + 2]);
    }
  });
}

void check_axis(const Grid& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) {
    throw std::invalid_argument("axis " + std::to_string(axis) +
                                " out of range for a grid of dimension " +
                                std::to_string(grid.dim()));
  }
}

}  // namespace

Grid::Grid(int dim, std::vector<std::size_t> points, std::vector<double> lengths) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("grid dimension must be 1..3, got " + std::to_string(dim));
  }
  if (points.size() != static_cast<std::size_t>(dim) ||
      lengths.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("grid needs one point count and one length per axis");
  }
  for (int a = 0; a < dim; ++a) {
    if (points[a] < kMinPointsPerAxis) {
      throw std::invalid_argument("grid needs at least " + std::to_string(kMinPointsPerAxis) +
                                  " points per axis, got " + std::to_string(points[a]));
    }
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
      throw std::invalid_argument("grid lengths must be positive and finite");
    }
    points_[a] = points[a];
    lengths_[a] = lengths[a];
  }
  size_ = 1;
  for (int a = dim - 1; a >= 0; --a) {
    strides_[a] = size_;
    size_ *= points_[a];
  }
}

Grid Grid::cube(int dim, std::size_t points, double length) {
  return Grid(dim, std::vector<std::size_t>(static_cast<std::size_t>(std::max(dim, 0)), points),
              std::vector<double>(static_cast<std::size_t>(std::max(dim, 0)), length));
}

std::array<std::size_t, kMaxDim> Grid::unravel(std::size_t flat) const {
  std::array<std::size_t, kMaxDim> idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = flat / strides_[a];
    flat %= strides_[a];
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<std::size_t, kMaxDim>& index) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat += (index[a] % points_[a]) * strides_[a];
  return flat;
}

std::array<double, kMaxDim> Grid::coordinate(std::size_t flat) const {
  const auto idx = unravel(flat);
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(idx[a]) * spacing(a);
  return x;
}

ScalarField::ScalarField(Grid grid, SymMat background)
    : grid_(std::move(grid)), background_(background), phi_(grid_.size(), 0.0) {
  if (background_.dim() != grid_.dim()) {
    throw std::invalid_argument("background dimension does not match the grid");
  }
}

ScalarField::ScalarField(Grid grid, SymMat background, std::vector<double> phi)
    : grid_(std::move(grid)), background_(background), phi_(std::move(phi)) {
  if (background_.dim() != grid_.dim()) {
    throw std::invalid_argument("background dimension does not match the grid");
  }
  if (phi_.size() != grid_.size()) {
    throw std::invalid_argument("field has " + std::to_string(phi_.size()) +
                                " values for a grid of " + std::to_string(grid_.size()));
  }
  remove_mean();
}

double ScalarField::remove_mean() {
  const double m = mean(phi_);
  for (double& v : phi_) v -= m;
  return m;
}

double ScalarField::background_value(std::size_t flat) const {
  const auto x = grid_.coordinate(flat);
  const int n = grid_.dim();
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q += x[i] * background_(i, j) * x[j];
  return 0.5 * q;
}

VectorField::VectorField(Grid grid, SymMat background)
    : grid_(std::move(grid)),
      background_(background),
      psi_(static_cast<std::size_t>(grid_.dim()), std::vector<double>(grid_.size(), 0.0)) {
  if (background_.dim() != grid_.dim()) {
    throw std::invalid_argument("background dimension does not match the grid");
  }
}

VectorField::VectorField(Grid grid, SymMat background, std::vector<std::vector<double>> components)
    : grid_(std::move(grid)), background_(background), psi_(std::move(components)) {
  if (background_.dim() != grid_.dim()) {
    throw std::invalid_argument("background dimension does not match the grid");
  }
  if (psi_.size() != static_cast<std::size_t>(grid_.dim())) {
    throw std::invalid_argument("vector field needs one component per axis");
  }
  for (const auto& c : psi_) {
    if (c.size() != grid_.size()) {
      throw std::invalid_argument("vector field component size does not match the grid");
    }
  }
}

MultiIndex MultiIndex::axes(std::initializer_list<int> list) {
  MultiIndex m;
  for (int a : list) {
    if (a < 0 || a >= kMaxDim) throw std::invalid_argument("axis out of range in multi-index");
    ++m.order[a];
  }
  return m;
}

std::vector<double> periodic_d1(const Grid& grid, std::span<const double> f, int axis) {
  check_axis(grid, axis);
  std::vector<double> out(grid.size());
  const double inv = 1.0 / (12.0 * grid.spacing(axis));
  sweep_axis(grid, f, out, axis, [inv](const double* p) {
    return (p[-2] - 8.0 * p[-1] + 8.0 * p[1] - p[2]) * inv;
  });
  return out;
}

std::vector<double> periodic_d2(const Grid& grid, std::span<const double> f, int axis) {
  check_axis(grid, axis);
  std::vector<double> out(grid.size());
  const double h = grid.spacing(axis);
  const double inv = 1.0 / (12.0 * h * h);
  sweep_axis(grid, f, out, axis, [inv](const double* p) {
    return (-p[-2] + 16.0 * p[-1] - 30.0 * p[0] + 16.0 * p[1] - p[2]) * inv;
  });
  return out;
}

std::vector<double> periodic_derivative(const Grid& grid, std::span<const double> f,
                                        const MultiIndex& index) {
  if (index.total() > 3) {
    throw std::invalid_argument("derivative order " + std::to_string(index.total()) +
                                " exceeds 3");
  }
  for (int a = 0; a < kMaxDim; ++a) {
    if (index.order[a] < 0) throw std::invalid_argument("negative derivative order");
    if (index.order[a] > 0) check_axis(grid, a);
  }
  std::vector<double> current(f.begin(), f.end());
  for (int a = 0; a < grid.dim(); ++a) {
    switch (index.order[a]) {
      case 0:
        break;
      case 1:
        current = periodic_d1(grid, current, a);
        break;
      case 2:
        current = periodic_d2(grid, current, a);
        break;
      default:
        current = periodic_d1(grid, periodic_d2(grid, current, a), a);
        break;
    }
  }
  return current;
}

std::vector<double> derivative(const ScalarField& field, const MultiIndex& index) {
  const Grid& grid = field.grid();
  std::vector<double> out = periodic_derivative(grid, field.values(), index);
  const SymMat& s = field.background();
  switch (index.total()) {
    case 0:
      for (std::size_t p = 0; p < grid.size(); ++p) out[p] += field.background_value(p);
      break;
    case 1: {
      int a = 0;
      while (index.order[a] == 0) ++a;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto x = grid.coordinate(p);
        double sx = 0.0;
        for (int j = 0; j < grid.dim(); ++j) sx += s(a, j) * x[j];
        out[p] += sx;
      }
      break;
    }
    case 2: {
      int i = -1;
      int j = -1;
      for (int a = 0; a < kMaxDim; ++a) {
        for (int k = 0; k < index.order[a]; ++k) (i < 0 ? i : j) = a;
      }
      const double c = s(i, j);
      for (double& v : out) v += c;
      break;
    }
    default:
      break;
  }
  return out;
}

SymMat PackedHessian::at(std::size_t flat, const SymMat& background) const {
  SymMat m = background;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) m.set(i, j, background(i, j) + entries[packed_index(dim, i, j)][flat]);
  return m;
}

PackedHessian periodic_hessian(const Grid& grid, std::span<const double> phi) {
  const int n = grid.dim();
  PackedHessian h;
  h.dim = n;
  h.entries.resize(static_cast<std::size_t>(packed_size(n)));
  for (int i = 0; i < n; ++i) {
    h.entries[packed_index(n, i, i)] = periodic_d2(grid, phi, i);
    if (i + 1 < n) {
      const std::vector<double> di = periodic_d1(grid, phi, i);
      for (int j = i + 1; j < n; ++j) h.entries[packed_index(n, i, j)] = periodic_d1(grid, di, j);
    }
  }
  return h;
}

HessianField hessian(const ScalarField& field) {
  const PackedHessian h = periodic_hessian(field.grid(), field.values());
  HessianField out{field.grid(), std::vector<SymMat>(field.grid().size())};
  for (std::size_t p = 0; p < out.at.size(); ++p) out.at[p] = h.at(p, field.background());
  return out;
}

VectorField gradient(const ScalarField& field) {
  const Grid& grid = field.grid();
  std::vector<std::vector<double>> comps;
  comps.reserve(static_cast<std::size_t>(grid.dim()));
  for (int a = 0; a < grid.dim(); ++a) comps.push_back(periodic_d1(grid, field.values(), a));
  return VectorField(grid, field.background(), std::move(comps));
}

double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double oscillation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

}  // namespace lmcf
