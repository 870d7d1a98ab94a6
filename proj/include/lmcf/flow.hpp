#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmcf/grid.hpp"

namespace lmcf {

/// Solution sample of u_t = sum_i arctan(lambda_i(D^2 u)).
/// The full potential is field (background + periodic part) + offset.
struct FlowState {
  ScalarField field;
  double time = 0.0;
  double offset = 0.0;
  double offset_carry = 0.0;  // low-order part of the compensated offset sum
  std::size_t step_count = 0;
  double last_dt = 0.0;

  explicit FlowState(ScalarField f) : field(std::move(f)) {}
};

struct StepperConfig {
  double cfl_safety = 0.5;
  double t_end = 1.0;
  /// Interval between samples passed to hooks; <= 0 samples only t = 0 and t_end.
  double cadence = 0.0;
  /// Keep every sample in the returned trajectory, not only the endpoints.
  bool keep_samples = true;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Raised when a stage produces a non-finite value. Carries the last finite
/// state so callers can write a diagnostic snapshot.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, FlowState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const FlowState& last_good() const { return last_good_; }

 private:
  FlowState last_good_;
};

/// Stencil constant of the fourth-order second difference in the parabolic
/// time-step bound (its symbol is bounded by 4 c / h^2 = 16 / (3 h^2)).
inline constexpr double kStencilSymbolConstant = 4.0 / 3.0;

/// Pointwise theta(D^2 u).
std::vector<double> rhs_potential(const ScalarField& field);

/// safety * min_axis(h^2) / (2 n c_stencil).
double cfl_dt(const Grid& grid, double safety);

/// One SSP-RK3 step. The spatial mean of each stage update is moved into the
/// offset so the periodic part stays zero-mean.
FlowState step(const FlowState& state, double dt);

using FlowHook = std::function<void(const FlowState&)>;

/// Advances to t_end with dt = cfl_dt, landing exactly on every cadence time.
/// The hook (if any) sees t = 0, every cadence time and t_end.
std::vector<FlowState> evolve(const ScalarField& u0, const StepperConfig& config,
                              const FlowHook& hook = {});

/// Continues an existing state to config.t_end.
std::vector<FlowState> evolve(FlowState state, const StepperConfig& config,
                              const FlowHook& hook = {});

// Non-parametric system for f = Du:  df^a/dt = g^{ij}(f) d_ij f^a with
// g_ij = delta_ij + sum_a f^a_i f^a_j.

struct GmcfState {
  VectorField field;
  double time = 0.0;
  std::size_t step_count = 0;

  explicit GmcfState(VectorField f) : field(std::move(f)) {}
};

std::vector<std::vector<double>> rhs_gmcf(const VectorField& f);
GmcfState gmcf_step(const GmcfState& state, double dt);

using GmcfHook = std::function<void(const GmcfState&)>;
std::vector<GmcfState> gmcf_evolve(const VectorField& f0, const StepperConfig& config,
                                   const GmcfHook& hook = {});

/// max over points and axis pairs of |d_i f^j - d_j f^i| (fourth-order stencils).
double curl_residual(const VectorField& f);

/// Range of every RHS evaluation: (-n pi / 2, n pi / 2).
double rhs_bound(int n);

}  // namespace lmcf
