#include "lmcf/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "lmcf/parallel.hpp"
#include "lmcf/snapshot.hpp"

namespace lmcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Position of the sorted triple (i <= j <= k) in lexicographic order.
int triple_slot(int n, int i, int j, int k) {
  int slot = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c) {
        if (a == i && b == j && c == k) return slot;
        ++slot;
      }
  return -1;
}

int multiplicity(int i, int j, int k) {
  if (i == j && j == k) return 1;
  if (i == j || j == k || i == k) return 3;
  return 6;
}

std::vector<std::vector<double>> gradient_periodic_part(const ScalarField& field) {
  std::vector<std::vector<double>> g;
  for (int a = 0; a < field.grid().dim(); ++a) g.push_back(periodic_d1(field.grid(), field.values(), a));
  return g;
}

double sup_distance(const std::vector<std::vector<double>>& a,
                    const std::vector<std::vector<double>>& b) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    for (std::size_t p = 0; p < a[c].size(); ++p) d = std::max(d, std::abs(a[c][p] - b[c][p]));
  return d;
}

}  // namespace

double MonitorRecord::split_residual_max() const {
  if (split_residuals.empty()) return 0.0;
  return *std::min_element(split_residuals.begin(), split_residuals.end());
}

void write_monitor_csv(std::ostream& out, std::span<const MonitorRecord> records) {
  out << kMonitorCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_real(r.t) << ',' << format_real(r.lambda_min) << ','
        << format_real(r.lambda_max) << ',' << format_real(r.theta_min) << ','
        << format_real(r.theta_max) << ',' << format_real(r.sup_d3_sq) << ','
        << format_real(r.scaled_d3) << ',' << format_real(r.holder_ratio) << ','
        << format_real(r.a_sq_max) << ',' << format_real(r.scaled_a) << ','
        << format_real(r.osc_grad) << ',' << (r.ty_ii_ok ? 1 : 0) << ','
        << (r.convex_ok ? 1 : 0) << ',' << format_real(r.split_residual_max()) << '\n';
  }
}

Extrema hessian_extrema(const ScalarField& field) {
  const Grid& grid = field.grid();
  const PackedHessian h = periodic_hessian(grid, field.values());
  Extrema e{kInf, -kInf};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto ev = eigenvalues(h.at(p, field.background()));
    e.min = std::min(e.min, ev[0]);
    e.max = std::max(e.max, ev[grid.dim() - 1]);
  }
  return e;
}

Extrema phase_extrema(const ScalarField& field) {
  const Grid& grid = field.grid();
  const PackedHessian h = periodic_hessian(grid, field.values());
  Extrema e{kInf, -kInf};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double th = theta(h.at(p, field.background()));
    e.min = std::min(e.min, th);
    e.max = std::max(e.max, th);
  }
  return e;
}

double ThirdDerivatives::at(std::size_t flat, int i, int j, int k) const {
  int idx[3] = {i, j, k};
  std::sort(idx, idx + 3);
  return entries[triple_slot(dim, idx[0], idx[1], idx[2])][flat];
}

ThirdDerivatives third_derivatives(const ScalarField& field) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  ThirdDerivatives d;
  d.dim = n;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c)
        d.entries.push_back(periodic_derivative(grid, field.values(), MultiIndex::axes({a, b, c})));
  return d;
}

double sup_d3_squared(const ScalarField& field) {
  const ThirdDerivatives d = third_derivatives(field);
  const int n = d.dim;
  double sup = 0.0;
  for (std::size_t p = 0; p < field.grid().size(); ++p) {
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int c = b; c < n; ++c) {
          const double v = d.at(p, a, b, c);
          s += multiplicity(a, b, c) * v * v;
        }
    sup = std::max(sup, s);
  }
  return sup;
}

CurvatureNorm curvature_norm(const ScalarField& field) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  const PackedHessian h = periodic_hessian(grid, field.values());
  const ThirdDerivatives d = third_derivatives(field);
  CurvatureNorm out;
  out.values.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const EigenSym e = eigen_sym(h.at(p, field.background()));
      const SquareMat& q = e.vectors;
      double total = 0.0;
      // Rotate the third-derivative tensor into the eigenframe where g is diagonal.
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          for (int z = 0; z < n; ++z) {
            double t = 0.0;
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) t += q(i, x) * q(j, y) * q(k, z) * d.at(p, i, j, k);
            const double gx = 1.0 + e.values[x] * e.values[x];
            const double gy = 1.0 + e.values[y] * e.values[y];
            const double gz = 1.0 + e.values[z] * e.values[z];
            total += t * t / (gx * gy * gz);
          }
      out.values[p] = total;
    }
  });
  out.max = out.values.empty() ? 0.0 : *std::max_element(out.values.begin(), out.values.end());
  return out;
}

double gradient_oscillation(const ScalarField& field) {
  double osc = 0.0;
  for (const auto& g : gradient_periodic_part(field)) osc = std::max(osc, oscillation(g));
  return osc;
}

std::vector<double> split_residuals(const ScalarField& field) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  const PackedHessian h = periodic_hessian(grid, field.values());
  const SymMat& bg = field.background();
  std::vector<double> out;
  for (int e = 0; e < n; ++e) {
    double r = oscillation(h.entries[packed_index(n, e, e)]);
    for (int j = 0; j < n; ++j) {
      if (j == e) continue;
      for (double v : h.entries[packed_index(n, e, j)]) r = std::max(r, std::abs(bg(e, j) + v));
    }
    out.push_back(r);
  }
  return out;
}

std::vector<SplitDirection> splitting_detect(const ScalarField& field, double tol) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  const auto residuals = split_residuals(field);
  std::vector<SplitDirection> found;
  for (int e = 0; e < n; ++e) {
    if (residuals[e] > tol) continue;
    const auto diag = periodic_d2(grid, field.values(), e);
    const auto [lo, hi] = std::minmax_element(diag.begin(), diag.end());
    found.push_back({e, field.background()(e, e) + 0.5 * (*lo + *hi), residuals[e]});
  }
  return found;
}

double holder_ratio_sup(std::span<const FlowState> samples, double t_cap) {
  std::vector<std::pair<double, std::vector<std::vector<double>>>> grads;
  for (const auto& s : samples)
    if (s.time <= t_cap) grads.emplace_back(s.time, gradient_periodic_part(s.field));
  double sup = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double dt = grads[i].first - grads[j].first;
      if (dt > 0) sup = std::max(sup, sup_distance(grads[i].second, grads[j].second) / std::sqrt(dt));
    }
  return sup;
}

MonitorRecord evaluate_monitors(const FlowState& state, const MonitorOptions& options) {
  const ScalarField& field = state.field;
  const Grid& grid = field.grid();
  const int n = grid.dim();
  MonitorRecord r;
  r.t = state.time;

  const PackedHessian h = periodic_hessian(grid, field.values());
  r.lambda_min = kInf;
  r.lambda_max = -kInf;
  r.theta_min = kInf;
  r.theta_max = -kInf;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const SymMat m = h.at(p, field.background());
    const auto ev = eigenvalues(m);
    double th = 0.0;
    for (int i = 0; i < n; ++i) th += std::atan(ev[i]);
    r.lambda_min = std::min(r.lambda_min, ev[0]);
    r.lambda_max = std::max(r.lambda_max, ev[n - 1]);
    r.theta_min = std::min(r.theta_min, th);
    r.theta_max = std::max(r.theta_max, th);
    if (r.ty_ii_ok && !ty_condition_ii(m)) r.ty_ii_ok = false;
  }
  r.convex_ok = r.lambda_min >= -options.convex_tolerance;
  if (options.third_derivatives) {
    r.sup_d3_sq = sup_d3_squared(field);
    r.scaled_d3 = r.t * r.sup_d3_sq;
  }
  if (options.curvature) {
    r.a_sq_max = curvature_norm(field).max;
    r.scaled_a = r.t * r.a_sq_max;
  }
  r.osc_grad = gradient_oscillation(field);
  if (options.split) r.split_residuals = split_residuals(field);
  return r;
}

const MonitorRecord& MonitorRecorder::record(const FlowState& state) {
  MonitorRecord r = evaluate_monitors(state, options_);
  if (options_.holder && state.time <= options_.holder_t_cap * (1.0 + 1e-12)) {
    auto grad = gradient_periodic_part(state.field);
    for (const auto& past : history_) {
      const double dt = state.time - past.t;
      if (dt > 0) holder_sup_ = std::max(holder_sup_, sup_distance(grad, past.grad) / std::sqrt(dt));
    }
    history_.push_back({state.time, std::move(grad)});
  }
  r.holder_ratio = holder_sup_;
  records_.push_back(std::move(r));
  return records_.back();
}

MaxPrincipleReport max_principle_audit(std::span<const MonitorRecord> records, double t0) {
  MaxPrincipleReport rep;
  const MonitorRecord* prev = nullptr;
  for (const auto& r : records) {
    if (r.t < t0) continue;
    if (prev) {
      rep.theta_min_drop = std::max(rep.theta_min_drop, prev->theta_min - r.theta_min);
      rep.theta_max_rise = std::max(rep.theta_max_rise, r.theta_max - prev->theta_max);
      rep.range_growth = std::max({rep.range_growth, prev->lambda_min - r.lambda_min,
                                   r.lambda_max - prev->lambda_max});
    }
    prev = &r;
  }
  return rep;
}

DecayReport decay_audit(std::span<const MonitorRecord> records, double t0, double monotone_from) {
  DecayReport rep;
  std::vector<const MonitorRecord*> window;
  for (const auto& r : records)
    if (r.t >= t0 && r.t > 0) window.push_back(&r);
  if (window.empty()) return rep;

  const double t_mid = 0.5 * (window.front()->t + window.back()->t);
  double early = 0.0;
  double late = 0.0;
  for (const auto* r : window) {
    rep.observed_constant = std::max(rep.observed_constant, r->scaled_d3);
    (r->t <= t_mid ? early : late) = std::max(r->t <= t_mid ? early : late, r->scaled_d3);
  }
  rep.bounded = late <= 1.1 * early;

  for (std::size_t i = 1; i < window.size(); ++i) {
    const MonitorRecord* a = window[i - 1];
    const MonitorRecord* b = window[i];
    if (a->t < monotone_from || a->scaled_d3 <= 0.0) continue;
    rep.monotone_violation =
        std::max(rep.monotone_violation, (b->scaled_d3 - a->scaled_d3) / a->scaled_d3);
  }
  return rep;
}

double holder_audit(std::span<const MonitorRecord> records, double t_cap) {
  double sup = 0.0;
  for (const auto& r : records)
    if (r.t <= t_cap) sup = std::max(sup, r.holder_ratio);
  return sup;
}

ConvexityReport convexity_audit(std::span<const MonitorRecord> records, double tolerance) {
  ConvexityReport rep;
  if (records.empty()) return rep;
  rep.applicable = records.front().lambda_min >= -tolerance;
  rep.min_lambda = kInf;
  for (const auto& r : records) rep.min_lambda = std::min(rep.min_lambda, r.lambda_min);
  rep.ok = !rep.applicable || rep.min_lambda >= -tolerance;
  return rep;
}

}  // namespace lmcf
