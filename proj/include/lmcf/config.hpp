#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmcf/flow.hpp"
#include "lmcf/initial.hpp"
#include "lmcf/monitors.hpp"

namespace lmcf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialSpec {
  /// quadratic | trig | squarewave | supercritical | split
  std::string kind = "quadratic";
  std::vector<double> background;  // row-major n x n; empty means zero
  std::vector<TrigTerm> terms;
  double amplitude = 1.0;  // squarewave
  double c = 1.2;          // supercritical
  double epsilon = 0.1;
  double margin = 0.05;
  int axis = 0;  // split
  double pinned = 1.0;
  std::optional<double> hessian_bound;  // trig
};

/// Assertions evaluated after a run; unset entries are disabled.
struct AssertionSpec {
  std::optional<double> offset_drift;   // |c(t) - t theta(S)| and sup |phi|
  std::optional<double> hessian_range;  // eigenvalues within +-value for t >= audit_from
  std::optional<double> range_growth;   // outward move of the eigenvalue range
  std::optional<double> max_principle;  // drop of theta_min / rise of theta_max
  std::optional<double> theta_min;      // theta_min >= value at every sample
  std::optional<double> convexity;      // lambda_min >= -value when initially convex
  std::optional<double> split_residual; // best-axis residual at t_end
  std::optional<double> split_pinned;   // |pinned value - initial.pinned| at t_end
  std::optional<double> flattening;     // osc(Du)(t_end) <= value * osc(Du)(0)
  std::optional<double> decay_monotone; // relative increase after decay_monotone_from
  std::optional<double> curl;           // gmcf systems: curl residual
  bool decay_bounded = false;
  double audit_from = 0.0;
  double decay_monotone_from = 0.5;
};

struct PipelineSpec {
  double sigma0 = 0.05;
  double k = 16.0;
  double pinching = 1.05;
  double spectral_tolerance = 5e-5;
  double mollify_tolerance = 1e-10;
  double theta_tolerance = 1e-6;
};

struct ScenarioConfig {
  int dim = 1;
  std::vector<std::size_t> points;
  std::vector<double> lengths;
  InitialSpec initial;
  /// potential | gmcf
  std::string system = "potential";
  StepperConfig stepper;
  MonitorOptions monitors;
  std::string output_dir = "run";
  /// Write every k-th cadence sample as a snapshot; 0 keeps only final.snap.
  int snapshot_every = 1;
  AssertionSpec asserts;
  PipelineSpec pipeline;

  Grid grid() const;
};

/// Parses the flat `section.key = value` format. Lines may carry `#`
/// comments. Unknown or repeated keys, malformed values and failed
/// validation throw ConfigError.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_string(const std::string& text);
ScenarioConfig parse_config_file(const std::filesystem::path& path);

}  // namespace lmcf
