#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmcf/config.hpp"
#include "lmcf/monitors.hpp"

namespace lmcf {

/// Environment variable that overrides the root of relative output dirs.
inline constexpr const char* kOutputRootEnv = "LMCF_OUTPUT_ROOT";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct AssertionResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = true;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path dir;
  std::vector<AssertionResult> assertions;
  std::vector<MonitorRecord> records;
  std::string error;  // set on abort
};

/// Relative paths are placed under $LMCF_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::string& dir);

/// Builds the initial potential described by the config. Throws BuilderError.
ScalarField build_initial(const ScenarioConfig& cfg);

/// Re-checks the builder's advertised property with an independent monitor pass.
AssertionResult verify_initial(const ScenarioConfig& cfg, const ScalarField& u0);

/// Evolves the scenario and writes monitor.csv (or oracle.csv for the gmcf
/// system), snapshots/, final.snap and summary.json into the output dir.
/// Exit code 0 iff every enabled assertion passes, 1 on failure or numerical
/// abort. Builder failures throw BuilderError.
RunOutcome run_scenario(const ScenarioConfig& cfg, std::ostream& log);

/// rotate(sigma0) -> mollify(k) -> rotate(pi/4) -> evolve -> rotate back,
/// asserting phase-cone membership at every stage. sigma0 = 0 skips both
/// rotations.
RunOutcome run_pipeline(const ScenarioConfig& cfg, std::ostream& log);

struct ColumnDiscrepancy {
  std::string column;
  double value = 0.0;
  bool pass = true;
};

struct CompareReport {
  int exit_code = kExitOk;
  std::vector<ColumnDiscrepancy> columns;
  std::string error;
};

/// Per-column max discrepancy between the monitor.csv files of two runs.
/// The pseudo-column "grad" compares the gradients stored in final.snap
/// (a scalar snapshot is differentiated, a vector snapshot is used as is).
/// relative divides each difference by max(|a|, |b|). Mismatched sample
/// times, row counts or grids give exit code 2.
CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                           const std::vector<std::string>& columns, double tolerance,
                           bool relative);

}  // namespace lmcf
