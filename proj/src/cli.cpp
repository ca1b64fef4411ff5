#include "eqsadj/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eqsadj/config.hpp"
#include "eqsadj/csvio.hpp"
#include "eqsadj/oracle.hpp"
#include "eqsadj/version.hpp"

#include "CLI11.hpp"

namespace eqsadj {
namespace {

namespace fs = std::filesystem;

std::string csv_comment(const Scenario& sc) {
  return std::string("eqsadj ") + version + " config=" + config_hash(sc);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Least-squares slope of log(err) vs log(N); the observed order is its
// negation. Points with zero or non-finite error are skipped.
double observed_order(const std::vector<int>& n_t,
                      const std::vector<double>& rel_err, int* points_used) {
  std::vector<double> x, y;
  for (size_t i = 0; i < n_t.size(); ++i) {
    if (!(rel_err[i] > 0.0) || !std::isfinite(rel_err[i])) continue;
    x.push_back(std::log(static_cast<double>(n_t[i])));
    y.push_back(std::log(rel_err[i]));
  }
  if (points_used) *points_used = static_cast<int>(x.size());
  if (x.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double n = static_cast<double>(x.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return -(n * sxy - sx * sy) / denom;
}

int total_newton_iterations(const TransientSolution& sol) {
  int total = 0;
  for (const StepStats& s : sol.stats) total += s.iterations;
  return total;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int threads, bool dry_run) {
  const Scenario sc = load_scenario(config_path);
  const Mesh mesh = build_scenario_mesh(sc);
  const TimeGrid grid = build_scenario_timegrid(sc);

  if (dry_run) {
    std::cout << "dry-run: scenario " << sc.name << "\n"
              << "dry-run: mesh nodes=" << mesh.num_nodes()
              << " triangles=" << mesh.num_triangles() << "\n"
              << "dry-run: timegrid n_main=" << sc.timegrid.n_main
              << " samples=" << grid.size()
              << " refined_instants=" << grid.refined_at.size() << "\n";
    return 0;
  }

  const ScenarioRun run = run_scenario(sc, -1, true, threads);
  fs::create_directories(out_dir);
  const std::string comment = csv_comment(sc);
  const int n_t = sc.timegrid.n_main;

  {
    CsvWriter csv(join_path(out_dir, "qoi.csv"), comment);
    csv.header({"qoi", "n_t", "value"});
    for (size_t k = 0; k < sc.qois.size(); ++k)
      csv.row({sc.qois[k].name, std::to_string(n_t),
               format_full(run.qoi_values[k])});
  }

  {
    CsvWriter csv(join_path(out_dir, "sensitivities.csv"), comment);
    csv.header({"qoi", "parameter", "n_t", "avm_value", "volume_sigma",
                "volume_eps", "explicit_dgdp", "t0_eps", "t0_init"});
    for (size_t k = 0; k < sc.qois.size(); ++k) {
      for (size_t j = 0; j < sc.parameters.size(); ++j) {
        const SensitivityEntry& e =
            run.sens.at(static_cast<int>(k), static_cast<int>(j));
        csv.row({sc.qois[k].name, sc.parameters[j].name, std::to_string(n_t),
                 format_full(e.total), format_full(e.volume_sigma),
                 format_full(e.volume_eps), format_full(e.explicit_dgdp),
                 format_full(e.t0_eps), format_full(e.t0_init)});
      }
    }
  }

  for (const QoiSpec& q : sc.qois) {
    if (q.kind != QoiKind::pointwise_potential &&
        q.kind != QoiKind::pointwise_field_magnitude)
      continue;
    const std::vector<double> trace =
        qoi_trace(q, run.mesh, sc.materials, run.geom, run.solution);
    CsvWriter csv(join_path(out_dir, "trace_" + q.name + ".csv"), comment);
    csv.header({"t", "value"});
    for (int n = 0; n < run.solution.grid.size(); ++n)
      csv.row({format_full(run.solution.grid.t[n]), format_full(trace[n])});
  }

  std::ostringstream summary;
  summary << "eqsadj " << version << "\n"
          << "scenario " << sc.name << "\n"
          << "config " << config_hash(sc) << "\n"
          << "mesh nodes=" << run.mesh.num_nodes()
          << " triangles=" << run.mesh.num_triangles() << "\n"
          << "timegrid n_main=" << n_t << " samples=" << run.solution.grid.size()
          << "\n"
          << "newton total_iterations=" << total_newton_iterations(run.solution)
          << "\n";
  for (size_t k = 0; k < sc.qois.size(); ++k)
    summary << "qoi " << sc.qois[k].name << " = "
            << format_full(run.qoi_values[k]) << "\n";
  for (size_t k = 0; k < sc.qois.size(); ++k)
    for (size_t j = 0; j < sc.parameters.size(); ++j)
      summary << "sensitivity d(" << sc.qois[k].name << ")/d("
              << sc.parameters[j].name << ") = "
              << format_full(
                     run.sens.at(static_cast<int>(k), static_cast<int>(j)).total)
              << "\n";
  std::ofstream sum_file(join_path(out_dir, "summary.txt"));
  if (!sum_file)
    throw std::runtime_error("cannot write summary.txt in '" + out_dir + "'");
  sum_file << summary.str();
  std::cout << summary.str();
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}

int cmd_convergence(const std::string& config_path, const std::string& out_dir,
                    int threads) {
  const Scenario sc = load_scenario(config_path);
  const std::vector<int>& sweep = sc.timegrid.sweep;
  if (sweep.size() < 3)
    throw std::invalid_argument(
        "convergence: at least 3 sweep points are required for the order fit");
  if (sc.parameters.empty() || sc.qois.empty())
    throw std::invalid_argument(
        "convergence: scenario declares no (QoI, parameter) pairs");

  const int NQ = static_cast<int>(sc.qois.size());
  const int NP = static_cast<int>(sc.parameters.size());

  // AVM totals per sweep point.
  std::vector<Eigen::MatrixXd> avm;
  for (int n_t : sweep) {
    const ScenarioRun run = run_scenario(sc, n_t, true, threads);
    avm.push_back(run.sens.totals());
  }

  // Reference values: closed form when available, otherwise Richardson-
  // extrapolated central differences on the same grid.
  std::vector<Eigen::MatrixXd> ref(sweep.size(),
                                   Eigen::MatrixXd::Zero(NQ, NP));
  if (sc.analytic_oracle) {
    Eigen::MatrixXd r(NQ, NP);
    for (int k = 0; k < NQ; ++k)
      for (int j = 0; j < NP; ++j)
        r(k, j) =
            lumped_reference_sensitivity(sc, sc.qois[k], sc.parameters[j]);
    for (size_t i = 0; i < sweep.size(); ++i) ref[i] = r;
  } else {
    for (size_t i = 0; i < sweep.size(); ++i) {
      for (int j = 0; j < NP; ++j) {
        const std::vector<OracleReport> reports =
            fd_sensitivity(sc, sc.parameters[j].name, sweep[i], threads);
        for (int k = 0; k < NQ; ++k) ref[i](k, j) = reports[k].richardson;
      }
    }
  }

  fs::create_directories(out_dir);
  const std::string comment = csv_comment(sc);
  CsvWriter rows(join_path(out_dir, "convergence.csv"), comment);
  rows.header({"qoi", "parameter", "n_t", "avm_value", "oracle_value",
               "rel_error_percent"});
  CsvWriter orders(join_path(out_dir, "convergence_orders.csv"), comment);
  orders.header({"qoi", "parameter", "observed_order", "points"});

  for (int k = 0; k < NQ; ++k) {
    for (int j = 0; j < NP; ++j) {
      std::vector<double> rel_err(sweep.size());
      for (size_t i = 0; i < sweep.size(); ++i) {
        const double r = ref[i](k, j);
        const double scale = std::abs(r) > 0.0 ? std::abs(r) : 1.0;
        rel_err[i] = std::abs(avm[i](k, j) - r) / scale;
        rows.row({sc.qois[k].name, sc.parameters[j].name,
                  std::to_string(sweep[i]), format_full(avm[i](k, j)),
                  format_full(ref[i](k, j)), format_full(100.0 * rel_err[i])});
      }
      int points = 0;
      const double order = observed_order(sweep, rel_err, &points);
      orders.row({sc.qois[k].name, sc.parameters[j].name, format_full(order),
                  std::to_string(points)});
      std::cout << "convergence d(" << sc.qois[k].name << ")/d("
                << sc.parameters[j].name << "): observed_order = " << order
                << " (" << points << " points)\n";
    }
  }
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}

int cmd_check(const std::string& config_path, int threads, double tolerance) {
  const Scenario sc = load_scenario(config_path);
  if (sc.parameters.empty()) {
    std::cout << "nothing to check: scenario declares no parameters\n";
    return 0;
  }
  const double tol = tolerance > 0.0 ? tolerance : sc.run.tolerance;

  const ScenarioRun run = run_scenario(sc, -1, true, threads);
  bool all_ok = true;
  std::cout << "check " << sc.name << " (tolerance " << tol << ")\n";
  for (size_t j = 0; j < sc.parameters.size(); ++j) {
    const std::vector<OracleReport> reports =
        fd_sensitivity(sc, sc.parameters[j].name, -1, threads);
    for (size_t k = 0; k < sc.qois.size(); ++k) {
      const double avm =
          run.sens.at(static_cast<int>(k), static_cast<int>(j)).total;
      const OracleReport& fd = reports[k];
      const double scale = std::max(std::abs(fd.richardson), 1e-300);
      const double rel = std::abs(avm - fd.richardson) / scale;
      const bool ok = rel <= tol;
      all_ok = all_ok && ok;
      std::cout << "  " << sc.qois[k].name << "/" << sc.parameters[j].name
                << ": avm=" << format_full(avm)
                << " fd=" << format_full(fd.richardson)
                << " rel=" << format_full(rel)
                << " spread=" << format_full(fd.spread_rel)
                << (fd.reliable ? "" : " fd-unreliable")
                << (ok ? " ok" : " FAIL") << "\n";
    }
  }
  std::cout << (all_ok ? "check passed" : "check FAILED") << "\n";
  return all_ok ? 0 : 1;
}

int cmd_export_scenario(const std::string& name, std::string out_path) {
  const Scenario sc = builtin_scenario(name);
  if (out_path.empty()) out_path = name + ".json";
  save_scenario(sc, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "Transient nonlinear electroquasistatic field solver with adjoint "
      "parameter sensitivities"};
  app.set_version_flag("--version", std::string("eqsadj ") + version);
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", export_name, export_out;
  int threads = 1;
  bool dry_run = false;
  double tolerance = -1.0;

  CLI::App* run = app.add_subcommand(
      "run", "Solve a scenario; write QoI values, sensitivities, and traces");
  run->add_option("config", config_path, "Scenario config file (JSON)")
      ->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--threads", threads, "Worker threads (1 = deterministic)")
      ->check(CLI::Range(1, 256));
  run->add_flag("--dry-run", dry_run,
                "Validate and report the resolved sizes without solving");

  CLI::App* conv = app.add_subcommand(
      "convergence", "Time-step sweep against the oracle with an order fit");
  conv->add_option("config", config_path, "Scenario config file (JSON)")
      ->required();
  conv->add_option("--out", out_dir, "Output directory")->capture_default_str();
  conv->add_option("--threads", threads, "Worker threads (1 = deterministic)")
      ->check(CLI::Range(1, 256));

  CLI::App* check = app.add_subcommand(
      "check", "Compare adjoint sensitivities against the FD oracle");
  check->add_option("config", config_path, "Scenario config file (JSON)")
      ->required();
  check->add_option("--threads", threads, "Worker threads (1 = deterministic)")
      ->check(CLI::Range(1, 256));
  check->add_option("--tolerance", tolerance,
                    "Relative agreement threshold (default: run.tolerance)");

  CLI::App* exp = app.add_subcommand(
      "export-scenario", "Write a built-in scenario as a config file");
  exp->add_option("name", export_name, "Built-in scenario name")->required();
  exp->add_option("--out", export_out, "Output file (default <name>.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, threads, dry_run);
    if (conv->parsed()) return cmd_convergence(config_path, out_dir, threads);
    if (check->parsed()) return cmd_check(config_path, threads, tolerance);
    if (exp->parsed()) return cmd_export_scenario(export_name, export_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "error: solver: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace eqsadj
