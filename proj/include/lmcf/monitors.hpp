#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lmcf/flow.hpp"
#include "lmcf/grid.hpp"

namespace lmcf {

/// One time sample of every invariant diagnostic.
struct MonitorRecord {
  double t = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double sup_d3_sq = 0.0;    // sup |D^3 u|^2
  double scaled_d3 = 0.0;    // t * sup_d3_sq
  double holder_ratio = 0.0; // running sup of |Du(t) - Du(t')|_inf / sqrt(t - t')
  double a_sq_max = 0.0;     // sup |A|^2
  double scaled_a = 0.0;     // t * a_sq_max
  double osc_grad = 0.0;     // max over components of osc(Du - S x)
  bool ty_ii_ok = true;
  bool convex_ok = true;
  /// Per axis e: max(osc(u_ee), max_{j != e} |u_ej|).
  std::vector<double> split_residuals;

  /// Residual of the best-split axis.
  double split_residual_max() const;
};

inline constexpr const char* kMonitorCsvHeader =
    "t,lambda_min,lambda_max,theta_min,theta_max,sup_d3_sq,scaled_d3,holder_ratio,"
    "a_sq_max,scaled_a,osc_grad,ty_ii_ok,convex_ok,split_residual_max";

void write_monitor_csv(std::ostream& out, std::span<const MonitorRecord> records);

struct Extrema {
  double min = 0.0;
  double max = 0.0;
};

/// Gridwide extremes of the sorted Hessian eigenvalues.
Extrema hessian_extrema(const ScalarField& field);
/// Gridwide extremes of theta(D^2 u).
Extrema phase_extrema(const ScalarField& field);

/// d_ijk phi for i <= j <= k in lexicographic order.
struct ThirdDerivatives {
  int dim = 1;
  std::vector<std::vector<double>> entries;

  double at(std::size_t flat, int i, int j, int k) const;
};

ThirdDerivatives third_derivatives(const ScalarField& field);

/// sup over the grid of sum_{ijk} u_ijk^2.
double sup_d3_squared(const ScalarField& field);

struct CurvatureNorm {
  std::vector<double> values;  // |A|^2 per point
  double max = 0.0;
};

/// |A|^2 = g^{il} g^{jm} g^{kp} u_ijk u_lmp with g = I + (D^2 u)^2.
CurvatureNorm curvature_norm(const ScalarField& field);

double gradient_oscillation(const ScalarField& field);

std::vector<double> split_residuals(const ScalarField& field);

struct SplitDirection {
  int axis = 0;
  double pinned_value = 0.0;
  double residual = 0.0;
};

/// Coordinate directions e with e.D^2u.e constant and the e-row of mixed
/// second derivatives vanishing, both to tol.
std::vector<SplitDirection> splitting_detect(const ScalarField& field, double tol);

/// Sup over sample pairs t' < t <= t_cap of |Du(t) - Du(t')|_inf / sqrt(t - t').
double holder_ratio_sup(std::span<const FlowState> samples, double t_cap);

struct MonitorOptions {
  double holder_t_cap = 0.25;
  double convex_tolerance = 1e-6;
  bool third_derivatives = true;
  bool curvature = true;
  bool holder = true;
  bool split = true;
};

/// Builds MonitorRecords along a trajectory; keeps the gradients needed for
/// the Holder ratio up to the cap.
class MonitorRecorder {
 public:
  explicit MonitorRecorder(MonitorOptions options = {}) : options_(options) {}

  const MonitorRecord& record(const FlowState& state);
  const std::vector<MonitorRecord>& records() const { return records_; }
  FlowHook hook() {
    return [this](const FlowState& s) { record(s); };
  }

 private:
  struct GradientSample {
    double t;
    std::vector<std::vector<double>> grad;
  };
  MonitorOptions options_;
  std::vector<MonitorRecord> records_;
  std::vector<GradientSample> history_;
  double holder_sup_ = 0.0;
};

MonitorRecord evaluate_monitors(const FlowState& state, const MonitorOptions& options = {});

struct MaxPrincipleReport {
  double theta_min_drop = 0.0;  // largest decrease of theta_min between samples
  double theta_max_rise = 0.0;
  double range_growth = 0.0;    // largest outward move of either eigenvalue extreme
};

/// Considers consecutive samples with t >= t0.
MaxPrincipleReport max_principle_audit(std::span<const MonitorRecord> records, double t0 = 0.0);

struct DecayReport {
  double observed_constant = 0.0;  // sup of t sup|D^3 u|^2 over t >= t0
  /// Max over the later half of the window is within 10% of the earlier half.
  bool bounded = true;
  /// Largest relative increase of t sup|D^3 u|^2 between consecutive samples
  /// with t >= monotone_from (0 when non-increasing).
  double monotone_violation = 0.0;
};

DecayReport decay_audit(std::span<const MonitorRecord> records, double t0,
                        double monotone_from = 0.0);

/// Largest holder_ratio among samples with t <= t_cap.
double holder_audit(std::span<const MonitorRecord> records, double t_cap);

struct ConvexityReport {
  bool applicable = false;  // initial data convex to tolerance
  double min_lambda = 0.0;
  bool ok = true;
};

ConvexityReport convexity_audit(std::span<const MonitorRecord> records, double tolerance);

}  // namespace lmcf
