#include "lmcf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lmcf/mollify.hpp"
#include "lmcf/rotate.hpp"
#include "lmcf/snapshot.hpp"

namespace lmcf {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRotationCurlTolerance = 1e-6;

SymMat background_of(const ScenarioConfig& cfg) {
  if (cfg.initial.background.empty()) return SymMat(cfg.dim);
  try {
    return SymMat::from_row_major(cfg.dim, cfg.initial.background);
  } catch (const std::invalid_argument& e) {
    throw BuilderError(std::string("initial.background: ") + e.what());
  }
}

std::string snapshot_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06d.snap", index);
  return buf;
}

AssertionResult at_most(std::string name, double value, double limit) {
  return {std::move(name), value, limit, value <= limit};
}

AssertionResult at_least(std::string name, double value, double limit) {
  return {std::move(name), value, limit, value >= limit};
}

Json to_json(const AssertionResult& a) {
  return Json{{"name", a.name}, {"value", a.value}, {"limit", a.limit}, {"pass", a.pass}};
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

bool all_pass(const std::vector<AssertionResult>& list) {
  return std::all_of(list.begin(), list.end(), [](const auto& a) { return a.pass; });
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

void log_assertions(std::ostream& log, const std::vector<AssertionResult>& list) {
  for (const auto& a : list) {
    log << (a.pass ? "PASS " : "FAIL ") << a.name << " value=" << format_real(a.value)
        << " limit=" << format_real(a.limit) << '\n';
  }
}

double sup_phi(const ScalarField& f) { return sup_norm(f.values()); }

Json grid_json(const Grid& g) {
  Json points = Json::array();
  Json lengths = Json::array();
  for (int a = 0; a < g.dim(); ++a) {
    points.push_back(g.points(a));
    lengths.push_back(g.length(a));
  }
  return Json{{"n", g.dim()}, {"N", points}, {"lengths", lengths}};
}

std::vector<AssertionResult> potential_assertions(const ScenarioConfig& cfg,
                                                  const std::vector<MonitorRecord>& records,
                                                  const FlowState& final_state, Json& observed) {
  const AssertionSpec& as = cfg.asserts;
  std::vector<AssertionResult> out;
  const double t0 = as.audit_from;

  const MaxPrincipleReport mp = max_principle_audit(records, t0);
  const DecayReport decay = decay_audit(records, t0, as.decay_monotone_from);
  const double holder = holder_audit(records, cfg.monitors.holder_t_cap);
  double lambda_lo = kInf, lambda_hi = -kInf, theta_lo = kInf, theta_hi = -kInf, a_const = 0.0;
  for (const auto& r : records) {
    theta_lo = std::min(theta_lo, r.theta_min);
    theta_hi = std::max(theta_hi, r.theta_max);
    if (r.t < t0) continue;
    lambda_lo = std::min(lambda_lo, r.lambda_min);
    lambda_hi = std::max(lambda_hi, r.lambda_max);
    a_const = std::max(a_const, r.scaled_a);
  }
  const double theta_s = theta(final_state.field.background());
  const double drift = std::abs(final_state.offset - final_state.time * theta_s);
  const double osc0 = records.front().osc_grad;
  const double osc1 = records.back().osc_grad;

  observed["c3"] = decay.observed_constant;
  observed["holder"] = holder;
  observed["a_sq_constant"] = a_const;
  observed["lambda_range"] = {finite_or_null(lambda_lo), finite_or_null(lambda_hi)};
  observed["theta_range"] = {finite_or_null(theta_lo), finite_or_null(theta_hi)};
  observed["theta_min_drop"] = mp.theta_min_drop;
  observed["theta_max_rise"] = mp.theta_max_rise;
  observed["range_growth"] = mp.range_growth;
  observed["decay_bounded"] = decay.bounded;
  observed["decay_monotone_violation"] = decay.monotone_violation;
  observed["offset"] = final_state.offset;
  observed["offset_drift"] = drift;
  observed["sup_phi_final"] = sup_phi(final_state.field);
  observed["osc_grad_initial"] = osc0;
  observed["osc_grad_final"] = osc1;
  observed["split_residual_initial"] = records.front().split_residual_max();
  observed["split_residual_final"] = records.back().split_residual_max();
  observed["steps"] = final_state.step_count;

  if (as.offset_drift) {
    out.push_back(at_most("offset_drift", drift, *as.offset_drift));
    out.push_back(at_most("phi_stays_zero", sup_phi(final_state.field), *as.offset_drift));
  }
  if (as.hessian_range) {
    out.push_back(at_most("hessian_range", std::max(-lambda_lo, lambda_hi), *as.hessian_range));
  }
  if (as.range_growth) out.push_back(at_most("range_growth", mp.range_growth, *as.range_growth));
  if (as.max_principle) {
    out.push_back(at_most("theta_min_drop", mp.theta_min_drop, *as.max_principle));
    out.push_back(at_most("theta_max_rise", mp.theta_max_rise, *as.max_principle));
  }
  if (as.theta_min) out.push_back(at_least("theta_min", theta_lo, *as.theta_min));
  if (as.convexity) {
    const ConvexityReport cr = convexity_audit(records, *as.convexity);
    observed["convexity_applicable"] = cr.applicable;
    out.push_back({"convexity", cr.min_lambda, -*as.convexity, cr.ok});
  }
  if (as.split_residual) {
    out.push_back(
        at_most("split_residual", records.back().split_residual_max(), *as.split_residual));
  }
  if (as.split_pinned) {
    double best = kInf;
    for (const auto& d : splitting_detect(final_state.field, *as.split_pinned)) {
      if (d.axis == cfg.initial.axis) best = std::abs(d.pinned_value - cfg.initial.pinned);
    }
    out.push_back(at_most("split_pinned", best, *as.split_pinned));
  }
  if (as.flattening) {
    out.push_back(at_most("flattening", osc0 > 0 ? osc1 / osc0 : 0.0, *as.flattening));
  }
  if (as.decay_bounded) out.push_back({"decay_bounded", decay.observed_constant, 0.0, decay.bounded});
  if (as.decay_monotone) {
    out.push_back(at_most("decay_monotone", decay.monotone_violation, *as.decay_monotone));
  }
  return out;
}

RunOutcome run_gmcf(const ScenarioConfig& cfg, const ScalarField& u0, const fs::path& dir,
                    std::vector<AssertionResult> assertions, std::ostream& log) {
  RunOutcome outcome;
  outcome.dir = dir;
  std::ofstream oracle(dir / "oracle.csv");
  oracle << "t,curl_max\n";
  double curl_max = 0.0;
  int sample = 0;
  StepperConfig stepper = cfg.stepper;
  stepper.keep_samples = false;
  const auto hook = [&](const GmcfState& s) {
    const double curl = curl_residual(s.field);
    curl_max = std::max(curl_max, curl);
    oracle << format_real(s.time) << ',' << format_real(curl) << '\n';
    if (cfg.snapshot_every > 0 && sample % cfg.snapshot_every == 0) {
      write_snapshot(dir / "snapshots" / snapshot_name(sample), s.field, s.time);
    }
    ++sample;
  };
  const auto traj = gmcf_evolve(gradient(u0), stepper, hook);
  write_snapshot(dir / "final.snap", traj.back().field, traj.back().time);
  if (cfg.asserts.curl) assertions.push_back(at_most("curl", curl_max, *cfg.asserts.curl));

  Json summary{{"command", "run"}, {"system", "gmcf"}, {"grid", grid_json(u0.grid())},
               {"t_end", traj.back().time}, {"observed", {{"curl_max", curl_max},
                                                          {"steps", traj.back().step_count}}}};
  summary["assertions"] = Json::array();
  for (const auto& a : assertions) summary["assertions"].push_back(to_json(a));
  summary["passed"] = all_pass(assertions);
  write_json(dir / "summary.json", summary);
  log_assertions(log, assertions);
  outcome.assertions = std::move(assertions);
  outcome.exit_code = all_pass(outcome.assertions) ? kExitOk : kExitFailure;
  return outcome;
}

}  // namespace

fs::path resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = fs::path(root) / p;
  }
  return p;
}

ScalarField build_initial(const ScenarioConfig& cfg) {
  const Grid grid = cfg.grid();
  const InitialSpec& ic = cfg.initial;
  if (ic.kind == "quadratic") return quadratic(grid, background_of(cfg));
  if (ic.kind == "trig") return trig(grid, background_of(cfg), ic.terms, ic.hessian_bound);
  if (ic.kind == "squarewave") return c11_squarewave(grid, ic.amplitude);
  if (ic.kind == "supercritical") return supercritical(grid, ic.c, ic.epsilon, ic.margin).field;
  if (ic.kind == "split") return split(grid, ic.axis, ic.pinned, ic.terms);
  throw BuilderError("unknown initial kind " + ic.kind);
}

AssertionResult verify_initial(const ScenarioConfig& cfg, const ScalarField& u0) {
  MonitorOptions opts;
  opts.third_derivatives = false;
  opts.curvature = false;
  opts.holder = false;
  opts.split = cfg.initial.kind == "split";
  const MonitorRecord r = evaluate_monitors(FlowState(u0), opts);
  const InitialSpec& ic = cfg.initial;
  const double spread = std::max(-r.lambda_min, r.lambda_max);
  if (ic.kind == "quadratic") return at_most("initial_quadratic", sup_phi(u0), 0.0);
  if (ic.kind == "trig") {
    return at_most("initial_hessian_bound", spread, ic.hessian_bound.value_or(kInf));
  }
  if (ic.kind == "squarewave") {
    return at_most("initial_squarewave_range", spread,
                   (1 + kSquareWaveOvershoot) * std::abs(ic.amplitude));
  }
  if (ic.kind == "supercritical") {
    AssertionResult a = at_least("initial_supercritical", r.theta_min, kPi / 2 + ic.margin);
    a.pass = a.pass && r.lambda_min >= 0.0;
    return a;
  }
  const double residual = r.split_residuals.empty() ? kInf : r.split_residuals[ic.axis];
  return at_most("initial_split", residual, 1e-10);
}

RunOutcome run_scenario(const ScenarioConfig& cfg, std::ostream& log) {
  const fs::path dir = resolve_output_dir(cfg.output_dir);
  fs::create_directories(dir);
  if (cfg.snapshot_every > 0) fs::create_directories(dir / "snapshots");

  const ScalarField u0 = build_initial(cfg);
  std::vector<AssertionResult> assertions{verify_initial(cfg, u0)};
  if (cfg.system == "gmcf") return run_gmcf(cfg, u0, dir, std::move(assertions), log);

  RunOutcome outcome;
  outcome.dir = dir;
  MonitorRecorder recorder(cfg.monitors);
  int sample = 0;
  StepperConfig stepper = cfg.stepper;
  stepper.keep_samples = false;
  const auto hook = [&](const FlowState& s) {
    recorder.record(s);
    if (cfg.snapshot_every > 0 && sample % cfg.snapshot_every == 0) {
      write_snapshot(dir / "snapshots" / snapshot_name(sample), s.field, s.time, s.offset);
    }
    ++sample;
  };

  std::vector<FlowState> traj;
  try {
    traj = evolve(u0, stepper, hook);
  } catch (const NumericalAbort& e) {
    const fs::path diag = dir / "abort.snap";
    write_snapshot(diag, e.last_good().field, e.last_good().time, e.last_good().offset);
    outcome.exit_code = kExitFailure;
    outcome.error = std::string(e.what()) + "; last finite state in " + diag.string();
    outcome.records = recorder.records();
    log << "numerical abort: " << outcome.error << '\n';
    write_json(dir / "summary.json",
               Json{{"command", "run"}, {"error", outcome.error}, {"passed", false}});
    return outcome;
  }

  const FlowState& final_state = traj.back();
  write_snapshot(dir / "final.snap", final_state.field, final_state.time, final_state.offset);
  {
    std::ofstream csv(dir / "monitor.csv");
    write_monitor_csv(csv, recorder.records());
  }

  Json observed;
  auto checks = potential_assertions(cfg, recorder.records(), final_state, observed);
  assertions.insert(assertions.end(), checks.begin(), checks.end());

  Json summary{{"command", "run"},
               {"system", "potential"},
               {"grid", grid_json(u0.grid())},
               {"t_end", final_state.time},
               {"observed", observed}};
  summary["assertions"] = Json::array();
  for (const auto& a : assertions) summary["assertions"].push_back(to_json(a));
  summary["passed"] = all_pass(assertions);
  write_json(dir / "summary.json", summary);
  log_assertions(log, assertions);

  outcome.assertions = std::move(assertions);
  outcome.records = recorder.records();
  outcome.exit_code = all_pass(outcome.assertions) ? kExitOk : kExitFailure;
  return outcome;
}

RunOutcome run_pipeline(const ScenarioConfig& cfg, std::ostream& log) {
  const fs::path dir = resolve_output_dir(cfg.output_dir);
  fs::create_directories(dir);
  const PipelineSpec& pl = cfg.pipeline;
  const int n = cfg.dim;
  const double sigma0 = pl.sigma0;
  const bool rotate_stages = sigma0 != 0.0;

  const ScalarField u0 = build_initial(cfg);
  RunOutcome outcome;
  outcome.dir = dir;
  std::vector<AssertionResult>& checks = outcome.assertions;
  checks.push_back(verify_initial(cfg, u0));
  const bool flat_start = sup_phi(u0) == 0.0;

  Json stages = Json::array();
  auto record_stage = [&](const std::string& name, const ScalarField& f, double threshold,
                          double tolerance) {
    const Extrema th = phase_extrema(f);
    const Extrema ev = hessian_extrema(f);
    write_snapshot(dir / (name + ".snap"), f, 0.0, 0.0);
    checks.push_back(at_least(name + "_cone", th.min, threshold - tolerance));
    if (flat_start) checks.push_back(at_most(name + "_phi_zero", sup_phi(f), 1e-10));
    stages.push_back(Json{{"stage", name},
                          {"theta_min", th.min},
                          {"theta_max", th.max},
                          {"lambda_min", ev.min},
                          {"lambda_max", ev.max},
                          {"threshold", threshold}});
    return th;
  };
  auto rotation_checks = [&](const std::string& name, const RotationReport& rep) {
    checks.push_back(at_most(name + "_spectral_identity", rep.spectral_defect,
                             pl.spectral_tolerance));
    checks.push_back(at_most(name + "_curl", rep.curl_residual, kRotationCurlTolerance));
    stages.back()["spectral_defect"] = rep.spectral_defect;
    stages.back()["curl_residual"] = rep.curl_residual;
    stages.back()["path_spread"] = rep.path_spread;
    stages.back()["graph_margin"] = rep.plan.margin.value;
  };

  const double tau0 = (n - 1) * kPi / 2;
  try {
    record_stage("stage0_initial", u0, tau0, 0.0);

    // Step 1: small rotation.
    ScalarField v = u0;
    double tau1 = tau0;
    if (rotate_stages) {
      RotationResult r1 = rotate_field_with_report(u0, sigma0);
      tau1 = tau0 - n * sigma0;
      record_stage("stage1_rotated", r1.field, tau1, n * pl.spectral_tolerance);
      rotation_checks("stage1", r1.report);
      v = std::move(r1.field);
    }

    // Step 2: mollification keeps the Hessians inside the convex cone.
    const Extrema before = phase_extrema(v);
    const ScalarField vk = convolve(v, MollifierKernel(v.grid(), pl.k));
    const Extrema after = record_stage("stage2_mollified", vk, tau1, n * pl.spectral_tolerance);
    checks.push_back(at_least("stage2_cone_convexity", after.min, before.min - pl.mollify_tolerance));

    // Step 3: pi/4 rotation into the pinched regime.
    ScalarField w = vk;
    double tau3 = tau1;
    double total_sigma = 0.0;
    if (rotate_stages) {
      RotationResult r3 = rotate_field_with_report(vk, kPi / 4);
      tau3 = tau1 - n * kPi / 4;
      total_sigma = sigma0 + kPi / 4;
      record_stage("stage3_rotated", r3.field, tau3, n * pl.spectral_tolerance);
      rotation_checks("stage3", r3.report);
      const Extrema ev = hessian_extrema(r3.field);
      checks.push_back(at_most("stage3_pinching", std::max(-ev.min, ev.max), pl.pinching));
      w = std::move(r3.field);
    }

    // Evolution with the phase audit.
    MonitorRecorder recorder(cfg.monitors);
    StepperConfig stepper = cfg.stepper;
    stepper.keep_samples = false;
    const auto traj = evolve(w, stepper, recorder.hook());
    outcome.records = recorder.records();
    {
      std::ofstream csv(dir / "monitor.csv");
      write_monitor_csv(csv, outcome.records);
    }
    double theta_lo = kInf;
    for (const auto& r : outcome.records) theta_lo = std::min(theta_lo, r.theta_min);
    checks.push_back(at_least("stage4_evolved_theta_min", theta_lo, tau3 - pl.theta_tolerance));
    const FlowState& evolved = traj.back();
    write_snapshot(dir / "stage4_evolved.snap", evolved.field, evolved.time, evolved.offset);
    stages.push_back(Json{{"stage", "stage4_evolved"},
                          {"theta_min", theta_lo},
                          {"threshold", tau3},
                          {"t_end", evolved.time}});
    if (flat_start) checks.push_back(at_most("stage4_evolved_phi_zero", sup_phi(evolved.field), 1e-10));

    // Back to the original coordinates.
    if (rotate_stages) {
      RotationResult back = rotate_field_with_report(evolved.field, -total_sigma);
      record_stage("stage5_rotated_back", back.field, tau0 - pl.theta_tolerance,
                   n * pl.spectral_tolerance);
      rotation_checks("stage5", back.report);
    }
  } catch (const RotationError& e) {
    outcome.error = std::string("rotation failed: ") + e.what();
  } catch (const GraphConditionError& e) {
    outcome.error = std::string("rotation failed: ") + e.what();
  } catch (const NumericalAbort& e) {
    const fs::path diag = dir / "abort.snap";
    write_snapshot(diag, e.last_good().field, e.last_good().time, e.last_good().offset);
    outcome.error = std::string(e.what()) + "; last finite state in " + diag.string();
  }

  Json summary{{"command", "pipeline-supercritical"},
               {"grid", grid_json(u0.grid())},
               {"sigma0", sigma0},
               {"k", pl.k},
               {"stages", stages}};
  summary["assertions"] = Json::array();
  for (const auto& a : checks) summary["assertions"].push_back(to_json(a));
  if (!outcome.error.empty()) summary["error"] = outcome.error;
  summary["passed"] = outcome.error.empty() && all_pass(checks);
  write_json(dir / "summary.json", summary);
  log_assertions(log, checks);
  if (!outcome.error.empty()) log << "aborted at stage " << stages.size() << ": " << outcome.error << '\n';
  outcome.exit_code = summary["passed"].get<bool>() ? kExitOk : kExitFailure;
  return outcome;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  std::istringstream h(line);
  for (std::string cell; std::getline(h, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream r(line);
    std::vector<double> row;
    for (std::string cell; std::getline(r, cell, ',');) row.push_back(std::stod(cell));
    if (row.size() != t.header.size()) throw std::runtime_error("ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<std::vector<double>> full_gradient(const Snapshot& s) {
  const VectorField f = s.scalar ? gradient(*s.scalar) : *s.vector;
  const Grid& g = f.grid();
  std::vector<std::vector<double>> out;
  for (int a = 0; a < g.dim(); ++a) {
    std::vector<double> c(f.component(a).begin(), f.component(a).end());
    for (std::size_t p = 0; p < g.size(); ++p) {
      const auto x = g.coordinate(p);
      for (int j = 0; j < g.dim(); ++j) c[p] += f.background()(a, j) * x[j];
    }
    out.push_back(std::move(c));
  }
  return out;
}

double discrepancy(double a, double b, bool relative) {
  const double d = std::abs(a - b);
  if (!relative) return d;
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0 ? d / scale : 0.0;
}

}  // namespace

CompareReport compare_runs(const fs::path& a, const fs::path& b,
                           const std::vector<std::string>& columns, double tolerance,
                           bool relative) {
  CompareReport report;
  auto usage = [&](const std::string& msg) {
    report.exit_code = kExitUsage;
    report.error = msg;
    return report;
  };
  try {
    const bool wants_table = std::any_of(columns.begin(), columns.end(),
                                         [](const auto& c) { return c != "grad"; });
    Table ta, tb;
    if (wants_table) {
      ta = read_table(a / "monitor.csv");
      tb = read_table(b / "monitor.csv");
      if (ta.rows.size() != tb.rows.size()) return usage("runs have different sample counts");
      const int ca = ta.column("t");
      const int cb = tb.column("t");
      if (ca < 0 || cb < 0) return usage("monitor.csv lacks a t column");
      for (std::size_t i = 0; i < ta.rows.size(); ++i) {
        const double x = ta.rows[i][ca];
        const double y = tb.rows[i][cb];
        if (std::abs(x - y) > 1e-12 * std::max(1.0, std::abs(x))) {
          return usage("sample times differ at row " + std::to_string(i + 1));
        }
      }
    }
    for (const auto& col : columns) {
      ColumnDiscrepancy d{col, 0.0, true};
      if (col == "grad") {
        const Snapshot sa = read_snapshot(a / "final.snap");
        const Snapshot sb = read_snapshot(b / "final.snap");
        if (!(sa.grid() == sb.grid())) return usage("final snapshots live on different grids");
        if (std::abs(sa.time - sb.time) > 1e-12 * std::max(1.0, std::abs(sa.time))) {
          return usage("final snapshots have different times");
        }
        const auto ga = full_gradient(sa);
        const auto gb = full_gradient(sb);
        for (std::size_t c = 0; c < ga.size(); ++c)
          for (std::size_t p = 0; p < ga[c].size(); ++p)
            d.value = std::max(d.value, discrepancy(ga[c][p], gb[c][p], relative));
      } else {
        const int ca = ta.column(col);
        const int cb = tb.column(col);
        if (ca < 0 || cb < 0) return usage("unknown column '" + col + "'");
        for (std::size_t i = 0; i < ta.rows.size(); ++i)
          d.value = std::max(d.value, discrepancy(ta.rows[i][ca], tb.rows[i][cb], relative));
      }
      d.pass = d.value <= tolerance;
      report.columns.push_back(d);
    }
  } catch (const std::exception& e) {
    return usage(e.what());
  }
  const bool ok = std::all_of(report.columns.begin(), report.columns.end(),
                              [](const auto& c) { return c.pass; });
  report.exit_code = ok ? kExitOk : kExitFailure;
  return report;
}

}  // namespace lmcf
