#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ontolab/models.hpp"
#include "ontolab/version.hpp"

namespace ontolab {

enum class Experiment {
  qm,
  verify_model,
  variance,
  chain_bound,
  entropy,
  sweep,
  obstruction,
};

enum class OutputFormat { json, csv };

// Exit codes of the command-line tool, one per failure class.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCalibration = 3;
inline constexpr int kExitVerification = 4;
inline constexpr int kExitInfeasible = 5;

// Fully resolved run description.  Angles are radians here; the CLI
// accepts degrees and converts during parsing.
struct RunConfig {
  Experiment experiment = Experiment::qm;

  double theta = 0;
  double alpha_meas = 0;
  double beta_meas = 0;
  bool beta_given = false;  // beta defaults to alpha when omitted

  ModelKind model = ModelKind::belt;

  // sweep: inclusive theta range with `sweep_steps` points
  double theta_stop = 0;
  int sweep_steps = 0;

  std::vector<int> n_list;  // chain sizes; single-element for non-sweeps
  int n = 10;

  double renyi_alpha = 1.0;
  double delta = 0;
  std::optional<double> p_psi;  // defaults to (1 + <A>)/2 when absent
  bool critical_scan = false;
  double scan_tol = 1e-3;
  int entropy_grid = 2001;

  double arc_extent_a = 3 * kPi / 2;
  double arc_extent_b = 3 * kPi / 2;
  int b_grid = 72;

  int grid_size = 256;
  long long samples = 1000000;
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-6;
  int restarts = 8;

  bool timing = false;  // include measured wall time (breaks byte-for-byte
                        // reproducibility; off by default)

  OutputFormat output_format = OutputFormat::json;
  bool format_given = false;  // tabular experiments default to csv
  std::string output_path;    // empty = stdout

  std::string save_model_path;  // verify-model: write the calibrated record
  std::string load_model_path;  // verify-model: reuse a saved record
  std::string dump_profile_path;  // variance: write the tau/f/weight table
};

// Parse command-line arguments (and an optional --config file; flags
// override file values, unknown keys are errors).  Throws usage_error.
RunConfig parse_config(const std::vector<std::string>& args);

struct RunReport {
  std::string payload;      // rendered JSON or CSV, exactly as emitted
  int exit_code = kExitOk;  // kExitVerification when a verify run failed
};

// Dispatch a parsed config to the library, render the report and write
// it to config.output_path (stdout when empty).
RunReport run(const RunConfig& config);

// Full entry point used by the binary: parse, run, map errors to exit
// codes, print usage problems to stderr.
int cli_main(int argc, const char* const* argv);

}  // namespace ontolab
