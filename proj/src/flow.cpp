#include "lmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lmcf/parallel.hpp"

namespace lmcf {

namespace {

std::vector<double> theta_of_hessian(const Grid& grid, const SymMat& background,
                                     std::span<const double> phi) {
  const PackedHessian h = periodic_hessian(grid, phi);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) out[p] = theta(h.at(p, background));
  });
  return out;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string abort_message(const char* what, double time, int stage) {
  std::ostringstream msg;
  msg.precision(17);
  msg << what << ": non-finite value in RK stage " << stage << " at t=" << time;
  return msg.str();
}

std::vector<double> sample_times(double t_start, const StepperConfig& config) {
  std::vector<double> times;
  if (config.cadence > 0) {
    for (std::size_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * config.cadence;
      if (t >= config.t_end * (1.0 - 1e-12)) break;
      if (t > t_start) times.push_back(t);
    }
  }
  if (config.t_end > t_start) times.push_back(config.t_end);
  return times;
}

}  // namespace

void StepperConfig::validate() const {
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
    throw std::invalid_argument("cfl_safety must lie in (0, 1]");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("t_end must be finite and non-negative");
  }
  if (!std::isfinite(cadence)) throw std::invalid_argument("cadence must be finite");
}

double rhs_bound(int n) { return n * std::numbers::pi / 2; }

std::vector<double> rhs_potential(const ScalarField& field) {
  return theta_of_hessian(field.grid(), field.background(), field.values());
}

double cfl_dt(const Grid& grid, double safety) {
  double h2 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dim(); ++a) h2 = std::min(h2, grid.spacing(a) * grid.spacing(a));
  return safety * h2 / (2.0 * grid.dim() * kStencilSymbolConstant);
}

FlowState step(const FlowState& state, double dt) {
  const Grid& grid = state.field.grid();
  const SymMat& bg = state.field.background();
  const std::span<const double> phi0 = state.field.values();
  const std::size_t size = grid.size();

  auto evaluate = [&](std::span<const double> phi, int stage, double& mean_rate) {
    std::vector<double> rate = theta_of_hessian(grid, bg, phi);
    if (!all_finite(rate)) throw NumericalAbort(abort_message("step", state.time, stage), state);
    mean_rate = mean(rate);
    for (double& r : rate) r -= mean_rate;
    return rate;
  };

  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  const std::vector<double> l0 = evaluate(phi0, 1, m0);
  std::vector<double> phi1(size);
  for (std::size_t p = 0; p < size; ++p) phi1[p] = phi0[p] + dt * l0[p];

  const std::vector<double> l1 = evaluate(phi1, 2, m1);
  std::vector<double> phi2(size);
  for (std::size_t p = 0; p < size; ++p)
    phi2[p] = 0.75 * phi0[p] + 0.25 * (phi1[p] + dt * l1[p]);

  const std::vector<double> l2 = evaluate(phi2, 3, m2);
  FlowState next = state;
  std::vector<double>& phi3 = next.field.mutable_values();
  for (std::size_t p = 0; p < size; ++p)
    phi3[p] = phi0[p] / 3.0 + (2.0 / 3.0) * (phi2[p] + dt * l2[p]);
  if (!all_finite(phi3)) throw NumericalAbort(abort_message("step", state.time, 3), state);

  CompensatedSum offset{state.offset, state.offset_carry};
  offset.add(dt * (m0 + m1 + 4.0 * m2) / 6.0);
  offset.add(next.field.remove_mean());
  next.offset = offset.sum;
  next.offset_carry = offset.carry;
  next.time = state.time + dt;
  next.step_count = state.step_count + 1;
  next.last_dt = dt;
  return next;
}

std::vector<FlowState> evolve(const ScalarField& u0, const StepperConfig& config,
                              const FlowHook& hook) {
  return evolve(FlowState(u0), config, hook);
}

std::vector<FlowState> evolve(FlowState state, const StepperConfig& config,
                              const FlowHook& hook) {
  config.validate();
  const double dt_max = cfl_dt(state.field.grid(), config.cfl_safety);
  std::vector<FlowState> samples{state};
  if (hook) hook(state);

  for (double target : sample_times(state.time, config)) {
    const double t_prev = state.time;
    const double span = target - t_prev;
    const auto steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(span / dt_max * (1.0 - 1e-12))));
    const double dt = span / static_cast<double>(steps);
    for (std::size_t j = 1; j <= steps; ++j) {
      state = step(state, dt);
      state.time = j == steps ? target : t_prev + static_cast<double>(j) * dt;
    }
    if (hook) hook(state);
    if (config.keep_samples) {
      samples.push_back(state);
    }
  }
  if (!config.keep_samples && samples.back().time != state.time) samples.push_back(state);
  return samples;
}

std::vector<std::vector<double>> rhs_gmcf(const VectorField& f) {
  const Grid& grid = f.grid();
  const int n = grid.dim();
  const SymMat& bg = f.background();

  // first[a][i] = d_i psi^a, second[a][packed(i,j)] = d_ij psi^a
  std::vector<std::vector<std::vector<double>>> first(n);
  std::vector<std::vector<std::vector<double>>> second(n);
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < n; ++i) first[a].push_back(periodic_d1(grid, f.component(a), i));
    second[a].resize(static_cast<std::size_t>(packed_size(n)));
    for (int i = 0; i < n; ++i) {
      second[a][packed_index(n, i, i)] = periodic_d2(grid, f.component(a), i);
      for (int j = i + 1; j < n; ++j)
        second[a][packed_index(n, i, j)] = periodic_d1(grid, first[a][i], j);
    }
  }

  std::vector<std::vector<double>> out(n, std::vector<double>(grid.size()));
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      double jac[kMaxDim][kMaxDim];
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) jac[a][i] = bg(a, i) + first[a][i][p];
      SymMat g = SymMat::identity(n);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          double s = 0.0;
          for (int a = 0; a < n; ++a) s += jac[a][i] * jac[a][j];
          g.set(i, j, g(i, j) + s);
        }
      }
      const SymMat ginv = inverse(g);
      for (int a = 0; a < n; ++a) {
        double r = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) r += ginv(i, j) * second[a][packed_index(n, i, j)][p];
        out[a][p] = r;
      }
    }
  });
  return out;
}

GmcfState gmcf_step(const GmcfState& state, double dt) {
  const VectorField& f0 = state.field;
  const int n = f0.components();
  const std::size_t size = f0.grid().size();

  auto evaluate = [&](const VectorField& f, int stage) {
    auto rate = rhs_gmcf(f);
    for (const auto& r : rate)
      if (!all_finite(r)) throw std::runtime_error(abort_message("gmcf_step", state.time, stage));
    return rate;
  };

  VectorField f1 = f0;
  const auto l0 = evaluate(f0, 1);
  for (int a = 0; a < n; ++a) {
    auto& c = f1.mutable_component(a);
    for (std::size_t p = 0; p < size; ++p) c[p] += dt * l0[a][p];
  }
  VectorField f2 = f0;
  const auto l1 = evaluate(f1, 2);
  for (int a = 0; a < n; ++a) {
    auto& c = f2.mutable_component(a);
    const auto c0 = f0.component(a);
    const auto c1 = f1.component(a);
    for (std::size_t p = 0; p < size; ++p) c[p] = 0.75 * c0[p] + 0.25 * (c1[p] + dt * l1[a][p]);
  }
  GmcfState next = state;
  const auto l2 = evaluate(f2, 3);
  for (int a = 0; a < n; ++a) {
    auto& c = next.field.mutable_component(a);
    const auto c0 = f0.component(a);
    const auto c2 = f2.component(a);
    for (std::size_t p = 0; p < size; ++p)
      c[p] = c0[p] / 3.0 + (2.0 / 3.0) * (c2[p] + dt * l2[a][p]);
  }
  next.time = state.time + dt;
  next.step_count = state.step_count + 1;
  return next;
}

std::vector<GmcfState> gmcf_evolve(const VectorField& f0, const StepperConfig& config,
                                   const GmcfHook& hook) {
  config.validate();
  GmcfState state(f0);
  const double dt_max = cfl_dt(f0.grid(), config.cfl_safety);
  std::vector<GmcfState> samples{state};
  if (hook) hook(state);
  for (double target : sample_times(0.0, config)) {
    const double t_prev = state.time;
    const double span = target - t_prev;
    const auto steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(span / dt_max * (1.0 - 1e-12))));
    const double dt = span / static_cast<double>(steps);
    for (std::size_t j = 1; j <= steps; ++j) {
      state = gmcf_step(state, dt);
      state.time = j == steps ? target : t_prev + static_cast<double>(j) * dt;
    }
    if (hook) hook(state);
    if (config.keep_samples) samples.push_back(state);
  }
  if (!config.keep_samples && samples.back().time != state.time) samples.push_back(state);
  return samples;
}

double curl_residual(const VectorField& f) {
  const Grid& grid = f.grid();
  const int n = grid.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto dij = periodic_d1(grid, f.component(j), i);
      const auto dji = periodic_d1(grid, f.component(i), j);
      for (std::size_t p = 0; p < grid.size(); ++p)
        worst = std::max(worst, std::abs(dij[p] - dji[p]));
    }
  }
  return worst;
}

}  // namespace lmcf
