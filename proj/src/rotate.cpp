#include "lmcf/rotate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include <fftw3.h>

#include "lmcf/flow.hpp"
#include "lmcf/parallel.hpp"

namespace lmcf {

namespace {

constexpr int kNewtonMaxIterations = 50;

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Spectral antiderivative of every grid line along one axis. The line mean
// and the Nyquist mode of the input are discarded.
std::vector<double> line_antiderivative(const Grid& grid, std::span<const double> g, int axis) {
  const std::size_t n = grid.points(axis);
  const std::size_t s = grid.stride(axis);
  const std::size_t block = n * s;
  const std::size_t half = n / 2 + 1;
  std::unique_ptr<double, FftwFree> real(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> spec(fftw_alloc_complex(half));
  FftwPlan forward(fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), spec.get(), FFTW_ESTIMATE));
  FftwPlan backward(fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.get(), real.get(), FFTW_ESTIMATE));

  const double base_wave = 2.0 * std::numbers::pi / grid.length(axis);
  std::vector<double> out(grid.size());
  double* in = real.get();
  fftw_complex* c = spec.get();
  for (std::size_t line = 0; line < grid.size() / n; ++line) {
    const std::size_t base = (line / s) * block + (line % s);
    for (std::size_t k = 0; k < n; ++k) in[k] = g[base + k * s];
    fftw_execute(forward.get());
    c[0][0] = 0.0;
    c[0][1] = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
      if (2 * k == n) {
        c[k][0] = 0.0;
        c[k][1] = 0.0;
        continue;
      }
      // divide by i * kappa
      const double kappa = base_wave * static_cast<double>(k);
      const double re = c[k][0];
      const double im = c[k][1];
      c[k][0] = im / kappa;
      c[k][1] = -re / kappa;
    }
    fftw_execute(backward.get());
    for (std::size_t k = 0; k < n; ++k) out[base + k * s] = in[k] / static_cast<double>(n);
  }
  return out;
}

void lagrange_weights(double t, std::array<double, PeriodicInterpolator::kNodes>& w) {
  constexpr int first = -(PeriodicInterpolator::kNodes / 2 - 1);
  for (int k = 0; k < PeriodicInterpolator::kNodes; ++k) {
    double num = 1.0;
    double den = 1.0;
    for (int m = 0; m < PeriodicInterpolator::kNodes; ++m) {
      if (m == k) continue;
      num *= t - (first + m);
      den *= static_cast<double>(k - m);
    }
    w[k] = num / den;
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string describe_point(const Grid& grid, std::size_t flat) {
  std::ostringstream out;
  out.precision(17);
  const auto x = grid.coordinate(flat);
  out << "(";
  for (int a = 0; a < grid.dim(); ++a) out << (a ? ", " : "") << x[a];
  out << ")";
  return out.str();
}

}  // namespace

void PeriodicInterpolator::evaluate(const std::array<double, kMaxDim>& x,
                                    const std::vector<std::span<const double>>& fields,
                                    std::span<double> out) const {
  constexpr int first = -(kNodes / 2 - 1);
  const int n = grid_.dim();
  std::array<std::array<double, kNodes>, kMaxDim> w{};
  std::array<std::array<std::size_t, kNodes>, kMaxDim> node{};
  std::array<int, kMaxDim> count{1, 1, 1};
  for (int a = 0; a < kMaxDim; ++a) {
    if (a >= n) {
      w[a][0] = 1.0;
      node[a][0] = 0;
      continue;
    }
    const auto np = static_cast<long>(grid_.points(a));
    const double u = x[a] / grid_.spacing(a);
    const double base = std::floor(u);
    lagrange_weights(u - base, w[a]);
    const long i0 = static_cast<long>(base);
    for (int k = 0; k < kNodes; ++k) {
      const long idx = ((i0 + first + k) % np + np) % np;
      node[a][k] = static_cast<std::size_t>(idx) * grid_.stride(a);
    }
    count[a] = kNodes;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < count[0]; ++i) {
    for (int j = 0; j < count[1]; ++j) {
      const double wij = w[0][i] * w[1][j];
      for (int k = 0; k < count[2]; ++k) {
        const double weight = wij * w[2][k];
        const std::size_t flat = node[0][i] + node[1][j] + node[2][k];
        for (std::size_t f = 0; f < fields.size(); ++f) out[f] += weight * fields[f][flat];
      }
    }
  }
}

GraphMargin graph_condition_margin(const ScalarField& field, double sigma) {
  const Grid& grid = field.grid();
  const double c = std::cos(sigma);
  const double s = std::sin(sigma);
  const PackedHessian h = periodic_hessian(grid, field.values());
  GraphMargin best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const SymMat jac = SymMat::scalar(grid.dim(), c) + s * h.at(p, field.background());
    const double lo = eigenvalues(jac)[0];
    if (lo < best.value) best = {lo, p};
  }
  return best;
}

RotationPlan plan_rotation(const ScalarField& field, double sigma) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  const SymMat& bg = field.background();
  if (n >= 2 && !bg.is_diagonal()) {
    throw std::invalid_argument(
        "rotation needs a diagonal background in dimension >= 2 (the rotated period "
        "lattice must stay rectangular)");
  }
  if (!std::isfinite(sigma)) throw std::invalid_argument("rotation angle must be finite");

  RotationPlan plan;
  plan.sigma = sigma;
  plan.margin = graph_condition_margin(field, sigma);
  if (!(plan.margin.value > 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "graph condition fails for sigma=" << sigma << ": margin " << plan.margin.value
        << " at x=" << describe_point(grid, plan.margin.location);
    throw RotationError(msg.str());
  }

  // Angle margin: the rotated angle is monotone in lambda, so the gridwide
  // eigenvalue extremes are the only candidates.
  const PackedHessian h = periodic_hessian(grid, field.values());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t lo_at = 0;
  std::size_t hi_at = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto ev = eigenvalues(h.at(p, bg));
    if (ev[0] < lo) lo = ev[0], lo_at = p;
    if (ev[n - 1] > hi) hi = ev[n - 1], hi_at = p;
  }
  for (auto [value, at] : {std::pair{lo, lo_at}, std::pair{hi, hi_at}}) {
    try {
      rotate_eigenvalue(value, sigma);
    } catch (const GraphConditionError& e) {
      throw RotationError(std::string(e.what()) + " at x=" + describe_point(grid, at));
    }
  }
  plan.rotated_background = rotate_spectrum(bg, sigma);
  const double c = std::cos(sigma);
  const double s = std::sin(sigma);
  for (int a = 0; a < n; ++a) plan.rotated_lengths.push_back((c + s * bg(a, a)) * grid.length(a));
  return plan;
}

RotationResult rotate_field_with_report(const ScalarField& field, double sigma) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  const int np = packed_size(n);
  const SymMat& bg = field.background();
  RotationPlan plan = plan_rotation(field, sigma);
  const SymMat& bg_rot = plan.rotated_background;
  const double c = std::cos(sigma);
  const double s = std::sin(sigma);

  std::vector<std::size_t> points;
  for (int a = 0; a < n; ++a) points.push_back(grid.points(a));
  const Grid target(n, points, plan.rotated_lengths);

  // Interpolated source data: D phi (n arrays) followed by packed D^2 phi.
  std::vector<std::vector<double>> source;
  for (int a = 0; a < n; ++a) source.push_back(periodic_d1(grid, field.values(), a));
  PackedHessian hess = periodic_hessian(grid, field.values());
  for (auto& e : hess.entries) source.push_back(std::move(e));
  const std::vector<std::span<const double>> views(source.begin(), source.end());
  const PeriodicInterpolator interp(grid);

  std::array<double, kMaxDim> scale{1.0, 1.0, 1.0};
  for (int a = 0; a < n; ++a) scale[a] = c + s * bg(a, a);

  const std::size_t size = target.size();
  std::vector<std::array<double, kMaxDim>> preimage(size);
  std::vector<std::vector<double>> grad_at(n, std::vector<double>(size));
  std::vector<SymMat> source_hessian(size, SymMat(n));
  int max_iterations = 0;

  std::vector<double> sample(static_cast<std::size_t>(n + np));
  auto residual = [&](const std::array<double, kMaxDim>& x, const std::array<double, kMaxDim>& r,
                      std::array<double, kMaxDim>& f) {
    interp.evaluate(x, views, sample);
    double norm = 0.0;
    for (int a = 0; a < n; ++a) {
      f[a] = scale[a] * x[a] + s * sample[a] - r[a];
      norm = std::max(norm, std::abs(f[a]));
    }
    return norm;
  };

  for (std::size_t q = 0; q < size; ++q) {
    const auto r = target.coordinate(q);
    std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) x[a] = r[a] / scale[a];
    const double tol = 1e-13 * (1.0 + max_abs(std::span(r.data(), n)));

    std::array<double, kMaxDim> f{};
    double norm = residual(x, r, f);
    int it = 0;
    bool converged = norm <= tol;
    while (!converged && it < kNewtonMaxIterations) {
      ++it;
      SymMat jac(n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          jac.set(i, j, (i == j ? scale[i] : 0.0) + s * sample[n + packed_index(n, i, j)]);
      const SymMat jinv = inverse(jac);
      std::array<double, kMaxDim> dx{0.0, 0.0, 0.0};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dx[i] += jinv(i, j) * f[j];

      double damping = 1.0;
      std::array<double, kMaxDim> trial = x;
      std::array<double, kMaxDim> f_trial{};
      double trial_norm = 0.0;
      for (;;) {
        for (int a = 0; a < n; ++a) trial[a] = x[a] - damping * dx[a];
        trial_norm = residual(trial, r, f_trial);
        if (trial_norm < norm || damping < 1e-4) break;
        damping *= 0.5;
      }
      const double step = max_abs(std::span(dx.data(), n)) * damping;
      x = trial;
      f = f_trial;
      norm = trial_norm;
      converged = norm <= tol || step <= 1e-15 * (1.0 + max_abs(std::span(x.data(), n)));
    }
    if (!converged) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "graph inversion did not converge in " << kNewtonMaxIterations
          << " Newton iterations at r=" << describe_point(target, q) << " (residual " << norm
          << ")";
      throw RotationError(msg.str());
    }
    max_iterations = std::max(max_iterations, it);
    // sample holds the data at the accepted x
    residual(x, r, f);
    preimage[q] = x;
    for (int j = 0; j < n; ++j) {
      double gj = 0.0;
      for (int k = 0; k < n; ++k) gj += ((j == k ? c : 0.0) - s * bg_rot(j, k)) * sample[k];
      grad_at[j][q] = gj;
    }
    SymMat hu = bg;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) hu.set(i, j, bg(i, j) + sample[n + packed_index(n, i, j)]);
    source_hessian[q] = hu;
  }

  RotationReport report;
  report.plan = plan;
  report.max_newton_iterations = max_iterations;
  report.curl_residual = curl_residual(VectorField(target, bg_rot, grad_at));
  std::vector<double> psi = integrate_periodic_gradient(target, grad_at, &report.path_spread);
  ScalarField rotated(target, bg_rot, std::move(psi));

  const PackedHessian hv = periodic_hessian(target, rotated.values());
  double defect = 0.0;
  for (std::size_t q = 0; q < size; ++q) {
    const auto ev_new = eigenvalues(hv.at(q, bg_rot));
    const auto ev_old = eigenvalues(source_hessian[q]);
    for (int i = 0; i < n; ++i) {
      const double expected = std::atan(ev_old[i]) - sigma;
      defect = std::max(defect, std::abs(std::atan(ev_new[i]) - expected));
    }
  }
  report.spectral_defect = defect;
  return {std::move(rotated), report, std::move(preimage)};
}

ScalarField rotate_field(const ScalarField& field, double sigma) {
  return rotate_field_with_report(field, sigma).field;
}

std::vector<double> integrate_periodic_gradient(const Grid& grid,
                                                const std::vector<std::vector<double>>& g,
                                                double* spread) {
  const int n = grid.dim();
  if (g.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("gradient needs one component per axis");
  }
  std::vector<std::vector<double>> anti;
  for (int a = 0; a < n; ++a) anti.push_back(line_antiderivative(grid, g[a], a));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sum(grid.size(), 0.0);
  std::vector<double> lo(grid.size(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(grid.size(), -std::numeric_limits<double>::infinity());
  int orderings = 0;
  do {
    ++orderings;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto idx = grid.unravel(p);
      std::array<std::size_t, kMaxDim> walk{0, 0, 0};
      double value = 0.0;
      for (int m = 0; m < n; ++m) {
        const int a = order[m];
        const std::size_t from = grid.ravel(walk);
        walk[a] = idx[a];
        value += anti[a][grid.ravel(walk)] - anti[a][from];
      }
      sum[p] += value;
      lo[p] = std::min(lo[p], value);
      hi[p] = std::max(hi[p], value);
    }
  } while (std::next_permutation(order.begin(), order.end()));

  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    sum[p] /= orderings;
    worst = std::max(worst, hi[p] - lo[p]);
  }
  if (spread) *spread = worst;
  const double m = mean(sum);
  for (double& v : sum) v -= m;
  return sum;
}

}  // namespace lmcf
