#include "lmcf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace lmcf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

long to_integer(const std::string& key, const std::string& text) {
  long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> to_reals(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& w : words(text)) out.push_back(to_real(key, w));
  return out;
}

// "amplitude k_0 .. k_{n-1} [phase]; ..." with n taken from grid.dim.
std::vector<TrigTerm> to_terms(const std::string& key, const std::string& text, int dim) {
  std::vector<TrigTerm> out;
  std::istringstream in(text);
  for (std::string group; std::getline(in, group, ';');) {
    const auto w = words(group);
    if (w.empty()) continue;
    if (w.size() != static_cast<std::size_t>(dim) + 1 &&
        w.size() != static_cast<std::size_t>(dim) + 2) {
      throw ConfigError(key + ": each term needs an amplitude, " + std::to_string(dim) +
                        " wave numbers and an optional phase");
    }
    TrigTerm t;
    t.amplitude = to_real(key, w[0]);
    for (int j = 0; j < dim; ++j) t.wave[j] = static_cast<int>(to_integer(key, w[1 + j]));
    if (w.size() == static_cast<std::size_t>(dim) + 2) t.phase = to_real(key, w[dim + 1]);
    out.push_back(t);
  }
  return out;
}

}  // namespace

Grid ScenarioConfig::grid() const { return Grid(dim, points, lengths); }

ScenarioConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' must have the form section.key");
    }
    if (value.empty()) throw ConfigError(key + ": empty value");
    if (!entries.emplace(key, value).second) throw ConfigError(key + ": repeated key");
  }

  ScenarioConfig cfg;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto real = [&](const std::string& key, double& dst) {
    if (auto v = get(key)) dst = to_real(key, *v);
  };
  auto opt_real = [&](const std::string& key, std::optional<double>& dst) {
    if (auto v = get(key)) dst = to_real(key, *v);
  };
  auto boolean = [&](const std::string& key, bool& dst) {
    if (auto v = get(key)) dst = to_bool(key, *v);
  };

  const std::string* dim = get("grid.dim");
  if (!dim) throw ConfigError("grid.dim is required");
  cfg.dim = static_cast<int>(to_integer("grid.dim", *dim));
  if (cfg.dim < 1 || cfg.dim > kMaxDim) throw ConfigError("grid.dim must be 1, 2 or 3");
  const auto n = static_cast<std::size_t>(cfg.dim);

  const std::string* pts = get("grid.points");
  if (!pts) throw ConfigError("grid.points is required");
  for (const auto& w : words(*pts)) {
    const long v = to_integer("grid.points", w);
    if (v <= 0) throw ConfigError("grid.points must be positive");
    cfg.points.push_back(static_cast<std::size_t>(v));
  }
  if (cfg.points.size() == 1) cfg.points.assign(n, cfg.points[0]);
  if (cfg.points.size() != n) throw ConfigError("grid.points needs 1 or grid.dim values");

  cfg.lengths.assign(n, 2 * std::numbers::pi);
  if (auto v = get("grid.lengths")) {
    cfg.lengths = to_reals("grid.lengths", *v);
    if (cfg.lengths.size() == 1) cfg.lengths.assign(n, cfg.lengths[0]);
    if (cfg.lengths.size() != n) throw ConfigError("grid.lengths needs 1 or grid.dim values");
  }

  InitialSpec& ic = cfg.initial;
  if (auto v = get("initial.kind")) ic.kind = *v;
  if (auto v = get("initial.background")) {
    ic.background = to_reals("initial.background", *v);
    if (ic.background.size() != n * n) {
      throw ConfigError("initial.background needs " + std::to_string(n * n) + " values");
    }
  }
  if (auto v = get("initial.terms")) ic.terms = to_terms("initial.terms", *v, cfg.dim);
  real("initial.amplitude", ic.amplitude);
  real("initial.c", ic.c);
  real("initial.epsilon", ic.epsilon);
  real("initial.margin", ic.margin);
  if (auto v = get("initial.axis")) ic.axis = static_cast<int>(to_integer("initial.axis", *v));
  real("initial.pinned", ic.pinned);
  opt_real("initial.hessian_bound", ic.hessian_bound);

  if (auto v = get("flow.system")) cfg.system = *v;
  real("flow.t_end", cfg.stepper.t_end);
  real("flow.cadence", cfg.stepper.cadence);
  real("flow.cfl_safety", cfg.stepper.cfl_safety);

  boolean("monitors.third_derivatives", cfg.monitors.third_derivatives);
  boolean("monitors.curvature", cfg.monitors.curvature);
  boolean("monitors.holder", cfg.monitors.holder);
  boolean("monitors.split", cfg.monitors.split);
  real("monitors.holder_t_cap", cfg.monitors.holder_t_cap);
  real("monitors.convex_tolerance", cfg.monitors.convex_tolerance);

  if (auto v = get("output.dir")) cfg.output_dir = *v;
  if (auto v = get("output.snapshot_every")) {
    cfg.snapshot_every = static_cast<int>(to_integer("output.snapshot_every", *v));
  }

  AssertionSpec& as = cfg.asserts;
  opt_real("assert.offset_drift", as.offset_drift);
  opt_real("assert.hessian_range", as.hessian_range);
  opt_real("assert.range_growth", as.range_growth);
  opt_real("assert.max_principle", as.max_principle);
  opt_real("assert.theta_min", as.theta_min);
  opt_real("assert.convexity", as.convexity);
  opt_real("assert.split_residual", as.split_residual);
  opt_real("assert.split_pinned", as.split_pinned);
  opt_real("assert.flattening", as.flattening);
  opt_real("assert.decay_monotone", as.decay_monotone);
  opt_real("assert.curl", as.curl);
  boolean("assert.decay_bounded", as.decay_bounded);
  real("assert.audit_from", as.audit_from);
  real("assert.decay_monotone_from", as.decay_monotone_from);

  PipelineSpec& pl = cfg.pipeline;
  real("pipeline.sigma0", pl.sigma0);
  real("pipeline.k", pl.k);
  real("pipeline.pinching", pl.pinching);
  real("pipeline.spectral_tolerance", pl.spectral_tolerance);
  real("pipeline.mollify_tolerance", pl.mollify_tolerance);
  real("pipeline.theta_tolerance", pl.theta_tolerance);

  for (const auto& [key, value] : entries) {
    if (!used.count(key)) throw ConfigError("unknown key '" + key + "'");
  }

  // Validation before any compute.
  try {
    (void)cfg.grid();
    cfg.stepper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  static const std::set<std::string> kinds{"quadratic", "trig", "squarewave", "supercritical",
                                           "split"};
  if (!kinds.count(ic.kind)) throw ConfigError("initial.kind '" + ic.kind + "' is not known");
  if (cfg.system != "potential" && cfg.system != "gmcf") {
    throw ConfigError("flow.system must be potential or gmcf");
  }
  if (ic.axis < 0 || ic.axis >= cfg.dim) throw ConfigError("initial.axis out of range");
  if (cfg.snapshot_every < 0) throw ConfigError("output.snapshot_every must be >= 0");
  if (!(cfg.monitors.holder_t_cap >= 0)) throw ConfigError("monitors.holder_t_cap must be >= 0");
  if (!(pl.k > 0)) throw ConfigError("pipeline.k must be positive");
  if (!(std::abs(pl.sigma0) < std::numbers::pi / 4)) {
    throw ConfigError("pipeline.sigma0 must lie in (-pi/4, pi/4)");
  }
  return cfg;
}

ScenarioConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

}  // namespace lmcf
