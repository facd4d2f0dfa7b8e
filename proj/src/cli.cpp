#include "ontolab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ontolab/chain.hpp"
#include "ontolab/coarse.hpp"
#include "ontolab/entropy.hpp"

namespace ontolab {

namespace {

constexpr double kDegree = kPi / 180.0;
constexpr double kOptimizerTol = 1e-9;

// Help and version requests exit 0 without producing a report; they are
// routed past parse_config's RunConfig return value with this sentinel.
struct help_requested {
  std::string text;
};

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(bool v) { return v ? "true" : "false"; }

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  out << "# schema_version=" << kSchemaVersion
      << " library_version=" << kLibraryVersion << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw usage_error("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::qm: return "qm";
    case Experiment::verify_model: return "verify-model";
    case Experiment::variance: return "variance";
    case Experiment::chain_bound: return "chain-bound";
    case Experiment::entropy: return "entropy";
    case Experiment::sweep: return "sweep";
    case Experiment::obstruction: return "obstruction";
  }
  return "unknown";
}

const char* kind_name(ModelKind kind) {
  return kind == ModelKind::cap ? "cap" : "belt";
}

ordered_json model_summary(const ResponseModel& model) {
  ordered_json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        j["theta"] = m.state.theta();
        j["alpha_a"] = m.a.alpha();
        j["alpha_b"] = m.b.alpha();
        if constexpr (std::is_same_v<T, CapModel>) {
          j["kind"] = "cap";
          j["xi"] = m.xi;
          j["chi"] = m.chi;
          j["azimuth_separation"] = m.b_cap_azimuth - m.a_cap_azimuth;
        } else {
          j["kind"] = "belt";
          j["eta_a"] = m.eta_a;
          j["eta_b"] = m.eta_b;
          j["sign_a"] = m.sign_a;
          j["sign_b"] = m.sign_b;
          j["azimuth_separation"] = m.b_belt_azimuth - m.a_belt_azimuth;
        }
        j["calibration_tol"] = m.calibration_tol;
      },
      model);
  return j;
}

// One experiment's rendered output: the JSON pieces plus the CSV table,
// so either format can be emitted from a single dispatch.
struct Rendered {
  ordered_json config;
  ordered_json results;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  int exit_code = kExitOk;
};

Rendered run_qm(const RunConfig& cfg) {
  EntangledState state(cfg.theta);
  MeasurementDirection a(cfg.alpha_meas), b(cfg.beta_meas);
  JointStats stats = joint_stats(state, a, b);
  JointStats oracle = density_matrix_oracle(state, a, b);
  double residual = 0.0;
  residual = std::max(residual,
                      std::abs(stats.expectation_a() - oracle.expectation_a()));
  residual = std::max(residual,
                      std::abs(stats.expectation_b() - oracle.expectation_b()));
  residual =
      std::max(residual, std::abs(stats.correlation() - oracle.correlation()));
  for (int x : {1, -1}) {
    for (int y : {1, -1}) {
      residual = std::max(residual,
                          std::abs(stats.joint(x, y) - oracle.joint(x, y)));
    }
  }
  bool conditional_defined = stats.marginal_a(1) > 1e-12;
  double cond = conditional_defined
                    ? conditional_probability(state, a, b, 1, 1)
                    : 0.0;

  Rendered out;
  out.config = {{"theta", cfg.theta},
                {"alpha", cfg.alpha_meas},
                {"beta", cfg.beta_meas}};
  out.results = {{"expectation_a", stats.expectation_a()},
                 {"expectation_b", stats.expectation_b()},
                 {"correlation", stats.correlation()},
                 {"joint_pp", stats.joint(1, 1)},
                 {"joint_pm", stats.joint(1, -1)},
                 {"joint_mp", stats.joint(-1, 1)},
                 {"joint_mm", stats.joint(-1, -1)},
                 {"conditional_pp", conditional_defined
                                        ? ordered_json(cond)
                                        : ordered_json(nullptr)},
                 {"oracle_residual", residual}};
  out.csv_header = {"theta", "alpha", "beta", "expectation_a",
                    "expectation_b", "correlation", "joint_pp", "joint_pm",
                    "joint_mp", "joint_mm", "conditional_pp",
                    "oracle_residual"};
  out.csv_rows = {{fmt(cfg.theta), fmt(cfg.alpha_meas), fmt(cfg.beta_meas),
                   fmt(stats.expectation_a()), fmt(stats.expectation_b()),
                   fmt(stats.correlation()), fmt(stats.joint(1, 1)),
                   fmt(stats.joint(1, -1)), fmt(stats.joint(-1, 1)),
                   fmt(stats.joint(-1, -1)),
                   conditional_defined ? fmt(cond) : std::string(),
                   fmt(residual)}};
  return out;
}

Rendered run_verify(const RunConfig& cfg) {
  ResponseModel model =
      cfg.load_model_path.empty()
          ? calibrate(cfg.model, EntangledState(cfg.theta),
                      MeasurementDirection(cfg.alpha_meas),
                      MeasurementDirection(cfg.beta_meas), cfg.tol)
          : model_from_record(read_text_file(cfg.load_model_path));
  if (!cfg.save_model_path.empty()) {
    write_text_file(cfg.save_model_path, model_to_record(model) + "\n");
  }
  VerifyReport rep = verify_model(model, cfg.samples, cfg.seed);
  ordered_json summary = model_summary(model);

  Rendered out;
  out.config = {{"theta", summary["theta"]},
                {"alpha", summary["alpha_a"]},
                {"beta", summary["alpha_b"]},
                {"model", summary["kind"]},
                {"samples", cfg.samples},
                {"seed", cfg.seed},
                {"tol", cfg.tol}};
  if (!cfg.load_model_path.empty()) {
    out.config["load_model"] = cfg.load_model_path;
  }
  if (!cfg.save_model_path.empty()) {
    out.config["save_model"] = cfg.save_model_path;
  }
  out.results = {{"model", summary},
                 {"mc_marginal_a", rep.mc_marginal_a},
                 {"mc_marginal_b", rep.mc_marginal_b},
                 {"mc_correlation", rep.mc_correlation},
                 {"z_marginal_a", rep.z_marginal_a},
                 {"z_marginal_b", rep.z_marginal_b},
                 {"z_correlation", rep.z_correlation},
                 {"quad_marginal_a", rep.quad_marginal_a},
                 {"quad_marginal_b", rep.quad_marginal_b},
                 {"quad_correlation", rep.quad_correlation},
                 {"quad_joint_pp", rep.quad_joint_pp},
                 {"residual_marginal_a", rep.residual_marginal_a},
                 {"residual_marginal_b", rep.residual_marginal_b},
                 {"residual_correlation", rep.residual_correlation},
                 {"residual_joint_pp", rep.residual_joint_pp},
                 {"passed", rep.passed}};
  out.csv_header = {
      "kind", "theta", "alpha", "beta", "samples", "seed",
      "mc_marginal_a", "mc_marginal_b", "mc_correlation", "z_marginal_a",
      "z_marginal_b", "z_correlation", "quad_marginal_a", "quad_marginal_b",
      "quad_correlation", "quad_joint_pp", "residual_marginal_a",
      "residual_marginal_b", "residual_correlation", "residual_joint_pp",
      "passed"};
  out.csv_rows = {{summary["kind"].get<std::string>(),
                   fmt(summary["theta"].get<double>()),
                   fmt(summary["alpha_a"].get<double>()),
                   fmt(summary["alpha_b"].get<double>()),
                   std::to_string(cfg.samples), std::to_string(cfg.seed),
                   fmt(rep.mc_marginal_a), fmt(rep.mc_marginal_b),
                   fmt(rep.mc_correlation), fmt(rep.z_marginal_a),
                   fmt(rep.z_marginal_b), fmt(rep.z_correlation),
                   fmt(rep.quad_marginal_a), fmt(rep.quad_marginal_b),
                   fmt(rep.quad_correlation), fmt(rep.quad_joint_pp),
                   fmt(rep.residual_marginal_a), fmt(rep.residual_marginal_b),
                   fmt(rep.residual_correlation), fmt(rep.residual_joint_pp),
                   fmt(rep.passed)}};
  out.exit_code = rep.passed ? kExitOk : kExitVerification;
  return out;
}

Rendered run_variance(const RunConfig& cfg) {
  EntangledState state(cfg.theta);
  MeasurementDirection a(cfg.alpha_meas), b(cfg.beta_meas);
  ResponseModel model = calibrate(cfg.model, state, a, b, cfg.tol);
  CoarseProfile profile = coarse_grain(model, Wing::A, cfg.grid_size);
  double ea = expectation_A(state, a);
  VarianceReport vr = variance_delta(profile, ea);
  OmegaResult qm = minimize_omega(state, a, cfg.n, cfg.restarts,
                                  kOptimizerTol, cfg.seed);
  vr.qm_bound = qm.qm_bound;

  if (!cfg.dump_profile_path.empty()) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(profile.tau.size());
    for (std::size_t i = 0; i < profile.tau.size(); ++i) {
      rows.push_back(
          {fmt(profile.tau[i]), fmt(profile.f[i]), fmt(profile.weight[i])});
    }
    write_text_file(cfg.dump_profile_path,
                    to_csv({"tau", "f", "weight"}, rows));
  }

  Rendered out;
  out.config = {{"theta", cfg.theta},     {"alpha", cfg.alpha_meas},
                {"beta", cfg.beta_meas},  {"model", kind_name(cfg.model)},
                {"grid_size", cfg.grid_size}, {"n", cfg.n},
                {"restarts", cfg.restarts},   {"seed", cfg.seed},
                {"tol", cfg.tol}};
  out.results = {{"expectation", ea},
                 {"delta", vr.delta},
                 {"bound1", vr.bound1},
                 {"bound3", vr.bound3},
                 {"qm_bound", *vr.qm_bound},
                 {"qm_bound_n", cfg.n},
                 {"optimizer_converged", qm.converged}};
  out.csv_header = {"theta", "alpha", "model", "expectation", "delta",
                    "bound1", "bound3", "qm_bound", "qm_bound_n"};
  out.csv_rows = {{fmt(cfg.theta), fmt(cfg.alpha_meas), kind_name(cfg.model),
                   fmt(ea), fmt(vr.delta), fmt(vr.bound1), fmt(vr.bound3),
                   fmt(*vr.qm_bound), std::to_string(cfg.n)}};
  return out;
}

Rendered run_chain_bound(const RunConfig& cfg) {
  EntangledState state(cfg.theta);
  MeasurementDirection a(cfg.alpha_meas);
  std::vector<int> n_list = cfg.n_list.empty() ? std::vector<int>{cfg.n}
                                               : cfg.n_list;
  std::vector<BoundRow> rows =
      bound_convergence(state, a, n_list, cfg.restarts, kOptimizerTol,
                        cfg.seed);

  Rendered out;
  out.config = {{"theta", cfg.theta},
                {"alpha", cfg.alpha_meas},
                {"n_list", n_list},
                {"restarts", cfg.restarts},
                {"optimizer_tol", kOptimizerTol},
                {"seed", cfg.seed}};
  ordered_json jrows = ordered_json::array();
  for (const BoundRow& row : rows) {
    double wall = cfg.timing ? row.wall_time_ms : 0.0;
    jrows.push_back({{"n", row.n},
                     {"omega_min", row.omega_min},
                     {"qm_bound", row.qm_bound},
                     {"wall_time_ms", wall}});
    out.csv_rows.push_back({std::to_string(row.n), fmt(row.omega_min),
                            fmt(row.qm_bound), fmt(wall)});
  }
  out.results = {{"rows", jrows}};
  out.csv_header = {"n", "omega_min", "qm_bound", "wall_time_ms"};
  return out;
}

Rendered run_entropy(const RunConfig& cfg) {
  double p = cfg.p_psi ? *cfg.p_psi
                       : (1.0 + expectation_value(cfg.theta, cfg.alpha_meas)) /
                             2.0;
  EntropySpec spec{cfg.renyi_alpha};

  Rendered out;
  out.config = {{"p_psi", p},
                {"renyi_alpha", cfg.renyi_alpha},
                {"grid_size", cfg.entropy_grid}};
  if (!cfg.p_psi) {
    out.config["theta"] = cfg.theta;
    out.config["alpha"] = cfg.alpha_meas;
  }
  if (cfg.critical_scan) {
    out.config["scan_tol"] = cfg.scan_tol;
    // The critical variance is symmetric under p <-> 1-p, so scan the
    // reflected mean, mirroring what the minimizer does internally.
    double p_scan = p > 0.5 ? 1.0 - p : p;
    double delta_c = critical_variance(p_scan, spec, cfg.scan_tol);
    double lower = 4.0 * p_scan * (0.5 - p_scan);
    double delta_max = 4.0 * p_scan * (1.0 - p_scan);
    out.results = {{"p_scanned", p_scan},
                   {"delta_c", delta_c},
                   {"lower_bound", lower},
                   {"delta_max", delta_max},
                   {"scan_tol", cfg.scan_tol}};
    out.csv_header = {"p_psi", "renyi_alpha", "delta_c", "lower_bound",
                      "delta_max", "scan_tol"};
    out.csv_rows = {{fmt(p), fmt(cfg.renyi_alpha), fmt(delta_c), fmt(lower),
                     fmt(delta_max), fmt(cfg.scan_tol)}};
    return out;
  }

  out.config["delta"] = cfg.delta;
  EntropyReport rep =
      minimize_average_entropy(p, cfg.delta, spec, cfg.entropy_grid);
  ordered_json atoms = ordered_json::array();
  for (const Atom& atom : rep.minimizer.atoms) {
    atoms.push_back({{"weight", atom.weight}, {"p", atom.p}});
  }
  ordered_json candidate(nullptr);
  if (p > 0 && p < 0.5) {
    candidate = average_entropy(bilocal_candidate(p, cfg.delta), spec);
  }
  out.results = {{"h_bar", rep.h_bar},
                 {"is_bilocal", rep.is_bilocal},
                 {"atoms", atoms},
                 {"candidate_h_bar", candidate},
                 {"grid_size", rep.grid_size},
                 {"grid_resolution", rep.grid_resolution}};
  out.csv_header = {"p_psi", "renyi_alpha", "delta", "h_bar", "is_bilocal",
                    "grid_size", "atom1_weight", "atom1_p", "atom2_weight",
                    "atom2_p", "atom3_weight", "atom3_p"};
  std::vector<std::string> row = {fmt(p), fmt(cfg.renyi_alpha),
                                  fmt(cfg.delta), fmt(rep.h_bar),
                                  fmt(rep.is_bilocal),
                                  std::to_string(rep.grid_size)};
  for (std::size_t i = 0; i < 3; ++i) {
    if (i < rep.minimizer.atoms.size()) {
      row.push_back(fmt(rep.minimizer.atoms[i].weight));
      row.push_back(fmt(rep.minimizer.atoms[i].p));
    } else {
      row.push_back("");
      row.push_back("");
    }
  }
  out.csv_rows = {row};
  return out;
}

Rendered run_sweep(const RunConfig& cfg) {
  MeasurementDirection a(cfg.alpha_meas);
  int steps = cfg.sweep_steps;

  Rendered out;
  out.config = {{"theta_start", cfg.theta},
                {"theta_stop", cfg.theta_stop},
                {"steps", steps},
                {"alpha", cfg.alpha_meas},
                {"grid_size", cfg.grid_size},
                {"restarts", cfg.restarts},
                {"seed", cfg.seed},
                {"tol", cfg.tol}};
  out.csv_header = {"theta", "expectation", "delta_belt", "bound3",
                    "qm_bound_n10"};
  ordered_json jrows = ordered_json::array();
  for (int i = 0; i < steps; ++i) {
    double theta =
        steps > 1
            ? cfg.theta + (cfg.theta_stop - cfg.theta) * i / (steps - 1)
            : cfg.theta;
    EntangledState state(theta);
    double ea = expectation_A(state, a);
    BeltModel belt = calibrate_belt(state, a, a, cfg.tol);
    CoarseProfile profile =
        coarse_grain(ResponseModel{belt}, Wing::A, cfg.grid_size);
    VarianceReport vr = variance_delta(profile, ea);
    double qm10 = minimize_omega(state, a, 10, cfg.restarts, kOptimizerTol,
                                 cfg.seed)
                      .qm_bound;
    jrows.push_back({{"theta", theta},
                     {"expectation", ea},
                     {"delta_belt", vr.delta},
                     {"bound3", vr.bound3},
                     {"qm_bound_n10", qm10}});
    out.csv_rows.push_back(
        {fmt(theta), fmt(ea), fmt(vr.delta), fmt(vr.bound3), fmt(qm10)});
  }
  out.results = {{"rows", jrows}};
  return out;
}

Rendered run_obstruction(const RunConfig& cfg) {
  EntangledState state(cfg.theta);
  MeasurementDirection a(cfg.alpha_meas);
  ObstructionReport rep = obstruction_check(cfg.arc_extent_a,
                                            cfg.arc_extent_b, state, a,
                                            cfg.b_grid);

  Rendered out;
  out.config = {{"theta", cfg.theta},
                {"alpha", cfg.alpha_meas},
                {"arc_extent_a", cfg.arc_extent_a},
                {"arc_extent_b", cfg.arc_extent_b},
                {"b_grid", cfg.b_grid}};
  out.results = {{"marginals_feasible", rep.marginals_feasible},
                 {"model_min_conditional", rep.model_min_conditional},
                 {"model_max_conditional", rep.model_max_conditional},
                 {"quantum_min_conditional", rep.quantum_min_conditional},
                 {"quantum_max_conditional", rep.quantum_max_conditional},
                 {"case1_excluded", rep.case1_excluded},
                 {"case2_excluded", rep.case2_excluded},
                 {"excluded", rep.excluded()}};
  out.csv_header = {"theta", "alpha", "arc_extent_a", "arc_extent_b",
                    "b_grid", "marginals_feasible", "model_min_conditional",
                    "model_max_conditional", "quantum_min_conditional",
                    "quantum_max_conditional", "case1_excluded",
                    "case2_excluded", "excluded"};
  out.csv_rows = {{fmt(cfg.theta), fmt(cfg.alpha_meas),
                   fmt(cfg.arc_extent_a), fmt(cfg.arc_extent_b),
                   std::to_string(cfg.b_grid), fmt(rep.marginals_feasible),
                   fmt(rep.model_min_conditional),
                   fmt(rep.model_max_conditional),
                   fmt(rep.quantum_min_conditional),
                   fmt(rep.quantum_max_conditional), fmt(rep.case1_excluded),
                   fmt(rep.case2_excluded), fmt(rep.excluded())}};
  return out;
}

Rendered dispatch(const RunConfig& config) {
  switch (config.experiment) {
    case Experiment::qm: return run_qm(config);
    case Experiment::verify_model: return run_verify(config);
    case Experiment::variance: return run_variance(config);
    case Experiment::chain_bound: return run_chain_bound(config);
    case Experiment::entropy: return run_entropy(config);
    case Experiment::sweep: return run_sweep(config);
    case Experiment::obstruction: return run_obstruction(config);
  }
  throw std::logic_error("unhandled experiment");
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig config;
  CLI::App app{"Numerical laboratory for hidden-variable models of "
               "entangled qubit pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);
  app.set_help_all_flag("--help-all", "Expand help for every experiment");
  app.set_config("--config", "",
                 "Read options from an INI file (flags take precedence)");
  app.allow_config_extras(false);

  // Shared options live on the main app; subcommands fall through to it.
  std::string format_name = "json", model_name = "belt";
  auto* format_opt =
      app.add_option("--format", format_name, "Output format")
          ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", config.output_path,
                 "Write the report to this file instead of stdout");
  app.add_option("--seed", config.seed, "Seed for every stochastic routine")
      ->capture_default_str();
  app.add_option("--tol", config.tol, "Calibration tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--grid-size", config.grid_size,
                 "Polar quadrature grid size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--samples", config.samples, "Monte Carlo sample count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--restarts", config.restarts,
                 "Perturbed optimizer restarts")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--timing", config.timing,
               "Report measured wall time (breaks byte-for-byte "
               "reproducibility of reruns)");

  double theta_deg = 0, a_deg = 0, b_deg = 0, p_val = 0;
  double theta_stop_deg = 90;
  double extent_a_deg = 270, extent_b_deg = 270;
  std::vector<CLI::Option*> b_options;

  auto add_theta = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--theta-deg", theta_deg,
                                "State angle theta in degrees [0, 90]");
    if (required) opt->required();
    return opt;
  };
  auto add_directions = [&](CLI::App* cmd) {
    cmd->add_option("--a-deg", a_deg,
                    "Wing A measurement angle from z, degrees")
        ->capture_default_str();
    b_options.push_back(cmd->add_option(
        "--b-deg", b_deg,
        "Wing B measurement angle, degrees (defaults to --a-deg)"));
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_name, "Response model family")
        ->capture_default_str()
        ->check(CLI::IsMember({"cap", "belt"}));
  };

  CLI::App* qm_cmd =
      app.add_subcommand("qm", "Closed-form quantum statistics of one "
                               "measurement pair, with the brute-force "
                               "density-matrix cross-check");
  add_theta(qm_cmd, true);
  add_directions(qm_cmd);
  qm_cmd->callback([&] { config.experiment = Experiment::qm; });

  CLI::App* verify_cmd = app.add_subcommand(
      "verify-model", "Calibrate a response model and verify it against "
                      "quantum statistics by Monte Carlo and quadrature");
  auto* verify_theta = add_theta(verify_cmd, false);
  add_directions(verify_cmd);
  add_model(verify_cmd);
  verify_cmd->add_option("--save-model", config.save_model_path,
                         "Write the calibrated model record to this file");
  auto* load_opt =
      verify_cmd->add_option("--load-model", config.load_model_path,
                             "Verify a previously saved model record");
  verify_cmd->callback([&, verify_theta, load_opt] {
    config.experiment = Experiment::verify_model;
    if (load_opt->count() == 0 && verify_theta->count() == 0) {
      throw usage_error("verify-model needs --theta-deg or --load-model");
    }
  });

  CLI::App* variance_cmd = app.add_subcommand(
      "variance", "Coarse-grain a calibrated model over the accessible "
                  "polar angle and report its variance and bounds");
  add_theta(variance_cmd, true);
  add_directions(variance_cmd);
  add_model(variance_cmd);
  variance_cmd->add_option("--n", config.n,
                           "Chain size for the quantum bound column")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  variance_cmd->add_option("--dump-profile", config.dump_profile_path,
                           "Also write the tau,f,weight table to this file");
  variance_cmd->callback([&] { config.experiment = Experiment::variance; });

  CLI::App* chain_cmd = app.add_subcommand(
      "chain-bound", "Minimize the chained-correlation quantity over "
                     "measurement chains for each requested size");
  add_theta(chain_cmd, true);
  chain_cmd->add_option("--a-deg", a_deg,
                        "Target direction angle from z, degrees")
      ->capture_default_str();
  chain_cmd->add_option("--n", config.n_list,
                        "Chain sizes, comma separated (e.g. 2,5,10)")
      ->delimiter(',');
  chain_cmd->callback([&] { config.experiment = Experiment::chain_bound; });

  CLI::App* entropy_cmd = app.add_subcommand(
      "entropy", "Entropy-minimal outcome distributions under mean and "
                 "variance constraints, or the critical-variance scan");
  auto* entropy_theta = add_theta(entropy_cmd, false);
  entropy_cmd->add_option("--a-deg", a_deg,
                          "Wing A measurement angle from z, degrees")
      ->capture_default_str();
  auto* p_opt = entropy_cmd->add_option(
      "--p", p_val, "Mean outcome probability (overrides --theta-deg)");
  entropy_cmd->add_option("--delta", config.delta,
                          "Variance constraint on the +-1 scale")
      ->capture_default_str();
  entropy_cmd
      ->add_option("--renyi-alpha", config.renyi_alpha, "Renyi order")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  entropy_cmd->add_flag("--critical", config.critical_scan,
                        "Scan for the critical variance instead of "
                        "minimizing at a fixed --delta");
  entropy_cmd
      ->add_option("--scan-tol", config.scan_tol,
                   "Critical-variance bisection width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  entropy_cmd
      ->add_option("--entropy-grid", config.entropy_grid,
                   "Probability grid size for the minimization")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  entropy_cmd->callback([&, entropy_theta, p_opt] {
    config.experiment = Experiment::entropy;
    if (p_opt->count() > 0) config.p_psi = p_val;
    if (p_opt->count() == 0 && entropy_theta->count() == 0) {
      throw usage_error("entropy needs --p or --theta-deg");
    }
  });

  config.sweep_steps = 7;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Tabulate expectation, belt variance and the n=10 quantum "
               "bound over a range of state angles");
  sweep_cmd->add_option("--theta-start-deg", theta_deg,
                        "First state angle, degrees")
      ->capture_default_str();
  sweep_cmd->add_option("--theta-stop-deg", theta_stop_deg,
                        "Last state angle, degrees")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--steps", config.sweep_steps,
                   "Number of evenly spaced state angles")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--a-deg", a_deg,
                        "Wing A measurement angle from z, degrees")
      ->capture_default_str();
  sweep_cmd->callback([&] { config.experiment = Experiment::sweep; });

  CLI::App* obstruction_cmd = app.add_subcommand(
      "obstruction", "Feasibility check for belt-type models with "
                     "over-long +1 azimuth arcs");
  add_theta(obstruction_cmd, true);
  obstruction_cmd->add_option("--a-deg", a_deg,
                              "Conditioning direction angle, degrees")
      ->capture_default_str();
  obstruction_cmd->add_option("--extent-a-deg", extent_a_deg,
                              "Wing A arc extent, degrees")
      ->capture_default_str();
  obstruction_cmd->add_option("--extent-b-deg", extent_b_deg,
                              "Wing B arc extent, degrees")
      ->capture_default_str();
  obstruction_cmd
      ->add_option("--b-grid", config.b_grid,
                   "Number of scanned B directions")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  obstruction_cmd->callback(
      [&] { config.experiment = Experiment::obstruction; });

  for (CLI::App* sub : {qm_cmd, verify_cmd, variance_cmd, chain_cmd,
                        entropy_cmd, sweep_cmd, obstruction_cmd}) {
    sub->fallthrough();
  }

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("ontolab");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(storage.size());
  for (const std::string& s : storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw help_requested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw help_requested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::CallForVersion&) {
    throw help_requested{std::string(kLibraryVersion) + "\n"};
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  config.theta = theta_deg * kDegree;
  config.theta_stop = theta_stop_deg * kDegree;
  config.alpha_meas = a_deg * kDegree;
  bool beta_given = false;
  for (CLI::Option* opt : b_options) beta_given |= opt->count() > 0;
  config.beta_given = beta_given;
  config.beta_meas = beta_given ? b_deg * kDegree : config.alpha_meas;
  config.model = model_name == "cap" ? ModelKind::cap : ModelKind::belt;
  config.arc_extent_a = extent_a_deg * kDegree;
  config.arc_extent_b = extent_b_deg * kDegree;

  config.format_given = format_opt->count() > 0;
  bool tabular = config.experiment == Experiment::chain_bound ||
                 config.experiment == Experiment::sweep;
  if (config.format_given) {
    config.output_format =
        format_name == "csv" ? OutputFormat::csv : OutputFormat::json;
  } else {
    config.output_format = tabular ? OutputFormat::csv : OutputFormat::json;
  }
  return config;
}

RunReport run(const RunConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  Rendered rendered = dispatch(config);
  auto t1 = std::chrono::steady_clock::now();
  double wall =
      config.timing
          ? std::chrono::duration<double, std::milli>(t1 - t0).count()
          : 0.0;

  RunReport report;
  report.exit_code = rendered.exit_code;
  if (config.output_format == OutputFormat::csv) {
    report.payload = to_csv(rendered.csv_header, rendered.csv_rows);
  } else {
    ordered_json root;
    root["schema_version"] = kSchemaVersion;
    root["library_version"] = kLibraryVersion;
    root["experiment"] = experiment_name(config.experiment);
    root["config"] = rendered.config;
    root["results"] = rendered.results;
    root["wall_time_ms"] = wall;
    report.payload = root.dump(2) + "\n";
  }

  if (config.output_path.empty()) {
    std::cout << report.payload;
  } else {
    write_text_file(config.output_path, report.payload);
  }
  return report;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    RunConfig config = parse_config(args);
    return run(config).exit_code;
  } catch (const help_requested& h) {
    std::cout << h.text;
    return kExitOk;
  } catch (const usage_error& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const calibration_error& e) {
    std::cerr << "error (calibration): " << e.what() << "\n";
    return kExitCalibration;
  } catch (const verification_error& e) {
    std::cerr << "error (verification): " << e.what() << "\n";
    return kExitVerification;
  } catch (const infeasibility_error& e) {
    std::cerr << "error (infeasible): " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const conditional_error& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error (internal): " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace ontolab
