// Acceptance gate: each criterion prints exactly one PASS/FAIL line with the
// measured quantities; the exit status is the number of failing criteria.
// Usage: acceptance [--criterion N]   (N = 1..6; absent or 0 runs all)

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdarg>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eqsadj/adjoint.hpp"
#include "eqsadj/assembly.hpp"
#include "eqsadj/config.hpp"
#include "eqsadj/excitation.hpp"
#include "eqsadj/forward.hpp"
#include "eqsadj/materials.hpp"
#include "eqsadj/operators.hpp"
#include "eqsadj/oracle.hpp"
#include "eqsadj/qoi.hpp"
#include "eqsadj/scenario.hpp"
#include "eqsadj/sensitivity.hpp"

using namespace eqsadj;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, ap);
  va_end(ap);
  return std::string(buf);
}

// Least-squares slope of log(err) against log(N); returns the decay order.
double fitted_order(const std::vector<int>& n_t,
                    const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(n_t.size());
  for (size_t i = 0; i < n_t.size(); ++i) {
    const double x = std::log(static_cast<double>(n_t[i]));
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion_analytic_reproduction() {
  const std::vector<double> eps1_values = {4.0, 12.649110640673518, 40.0,
                                           126.49110640673518, 400.0};
  double worst_rel = 0.0, worst_eps1 = 0.0, slowest = 0.0;
  for (double e1 : eps1_values) {
    Scenario sc = builtin_scenario("layered_resistor");
    apply_param_overrides(sc, {{"eps1", e1}});
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioRun run = run_scenario(sc, 800, true, 1);
    slowest = std::max(slowest, seconds_since(t0));
    // dphi_ref/deps1 is entry (qoi=phi_ref -> 1, param=eps1 -> 0).
    const double avm = run.sens.at(1, 0).total;
    const double ref =
        lumped_reference_sensitivity(sc, sc.qois[1], sc.parameters[0]);
    const double rel = std::abs(avm - ref) / std::abs(ref);
    if (rel > worst_rel) {
      worst_rel = rel;
      worst_eps1 = e1;
    }
  }
  Outcome o;
  o.pass = worst_rel < 1e-2 && slowest < 120.0;
  o.detail = fmt(
      "dphi_ref/deps1 vs closed form over eps1 in [4,400] (2 decades, "
      "N_t=800): worst rel %.2e at eps1=%.3g (limit 1e-2), slowest point "
      "%.2f s (limit 120 s)",
      worst_rel, worst_eps1, slowest);
  return o;
}

// ---------------------------------------------------------------- criterion 2
Outcome criterion_convergence_order() {
  const std::vector<int> sweep = {100, 200, 400, 800};
  const Scenario sc = builtin_scenario("layered_resistor");
  // (qoi index, param index) pairs under study.
  std::vector<double> err_phi_eps, err_w_sigma;
  for (int n : sweep) {
    const ScenarioRun run = run_scenario(sc, n, true, 1);
    const double ref_pe =
        lumped_reference_sensitivity(sc, sc.qois[1], sc.parameters[0]);
    const double ref_ws =
        lumped_reference_sensitivity(sc, sc.qois[0], sc.parameters[1]);
    err_phi_eps.push_back(std::abs(run.sens.at(1, 0).total - ref_pe) /
                          std::abs(ref_pe));
    err_w_sigma.push_back(std::abs(run.sens.at(0, 1).total - ref_ws) /
                          std::abs(ref_ws));
  }
  const double order_pe = fitted_order(sweep, err_phi_eps);
  const double order_ws = fitted_order(sweep, err_w_sigma);
  Outcome o;
  o.pass = std::abs(order_pe - 1.0) <= 0.2 && std::abs(order_ws - 1.0) <= 0.2;
  o.detail = fmt(
      "log-log fit over N_t {100,200,400,800}: order(dphi_ref/deps1)=%.3f, "
      "order(dW_el/dsigma1)=%.3f (required 1.0 +/- 0.2)",
      order_pe, order_ws);
  return o;
}

// ---------------------------------------------------------------- criterion 3
Outcome criterion_nonlinear_cross_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = builtin_scenario("fgm_joint_simplified");
  const ScenarioRun run = run_scenario(sc, 200, true, 1);
  const std::vector<OracleReport> fd = fd_sensitivity(sc, "a2", 200, 1);
  const double rel_w =
      std::abs(run.sens.at(0, 0).total - fd[0].richardson) /
      std::abs(fd[0].richardson);
  const double rel_e =
      std::abs(run.sens.at(1, 0).total - fd[1].richardson) /
      std::abs(fd[1].richardson);
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = rel_w < 1e-2 && rel_e < 1e-2 && fd[0].reliable && fd[1].reliable &&
           elapsed < 1800.0;
  o.detail = fmt(
      "grading scenario at N_t=200 vs central differences: "
      "rel(dW_el_fgm/da2)=%.2e, rel(dE_c/da2)=%.2e (limit 1e-2 each), "
      "fd spreads %.1e/%.1e, elapsed %.1f s (limit 1800 s)",
      rel_w, rel_e, fd[0].spread_rel, fd[1].spread_rel, elapsed);
  return o;
}

// ---------------------------------------------------------------- criterion 4
bool property_assembly(std::string& why) {
  const Mesh mesh = build_layered_rect(0.01, 0.01, 3, 4);
  const std::vector<ElementGeometry> geom = element_geometry(mesh);
  MaterialMap mats;
  mats[1].kind = MaterialKind::fgm;
  mats[1].a1 = 1e-10;
  mats[1].a2 = 0.7e6;
  mats[1].a3 = 2.4e6;
  mats[1].a4 = 1864.0;
  mats[1].eps = 2e-11;
  mats[2].kind = MaterialKind::linear;
  mats[2].sigma = 3.0;
  mats[2].eps = 5.0;

  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> dist(-1e4, 1e4);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u(mesh.num_nodes());
    for (int i = 0; i < u.size(); ++i) u[i] = dist(gen);
    const std::vector<SpMat> ops = {assemble_K_sigma(mesh, geom, mats, u),
                                    assemble_K_eps(mesh, geom, mats),
                                    assemble_K_sigma_d(mesh, geom, mats, u)};
    for (const SpMat& K : ops) {
      const double asym = (Eigen::MatrixXd(K) -
                           Eigen::MatrixXd(K).transpose())
                              .cwiseAbs()
                              .maxCoeff();
      const double scale = Eigen::MatrixXd(K).cwiseAbs().maxCoeff();
      if (asym > 1e-15 * scale) {
        why = fmt("matrix asymmetry %.1e exceeds 1e-15 of scale", asym / scale);
        return false;
      }
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_nodes());
      const double null_defect = (K * ones).cwiseAbs().maxCoeff();
      if (null_defect > 1e-12 * scale) {
        why = fmt("constant-vector residual %.1e of scale", null_defect / scale);
        return false;
      }
    }
  }
  return true;
}

bool property_material_derivatives(std::string& why) {
  MaterialModel fgm;
  fgm.kind = MaterialKind::fgm;
  fgm.a1 = 1e-10;
  fgm.a2 = 0.7e6;
  fgm.a3 = 2.4e6;
  fgm.a4 = 1864.0;
  fgm.eps = 2e-11;

  std::mt19937 gen(7);
  std::uniform_real_distribution<double> mag(1e4, 5e6);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);

  for (int trial = 0; trial < 20; ++trial) {
    const double E = mag(gen), theta = ang(gen);
    const Eigen::Vector2d Evec(E * std::cos(theta), E * std::sin(theta));

    // Differential conductivity: symmetric and rotation-covariant.
    const Eigen::Matrix2d t = differential_conductivity(Evec, fgm);
    if (std::abs(t(0, 1) - t(1, 0)) > 1e-15 * t.cwiseAbs().maxCoeff()) {
      why = "sigma_d asymmetry";
      return false;
    }
    const double alpha = ang(gen);
    Eigen::Matrix2d R;
    R << std::cos(alpha), -std::sin(alpha), std::sin(alpha), std::cos(alpha);
    const Eigen::Matrix2d lhs = differential_conductivity(Eigen::Vector2d(R * Evec), fgm);
    const Eigen::Matrix2d rhs = R * t * R.transpose();
    if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12 * t.cwiseAbs().maxCoeff()) {
      why = "sigma_d rotation covariance";
      return false;
    }

    // d(sigma)/dE against central differences. The step is sized to the
    // law's characteristic field scale; deep in saturation the log-slope
    // drops below what double-precision differencing can resolve, so the
    // comparison only applies while the secant clears that floor.
    const double h = 1e-4 * fgm.a2;
    const double fd = (sigma_fgm(E + h, fgm) - sigma_fgm(E - h, fgm)) / (2 * h);
    const double an = sigma_fgm_dE(E, fgm);
    if (std::abs(fd) > 1e-10 * sigma_fgm(E, fgm) &&
        std::abs(an - fd) > 1e-5 * std::abs(fd)) {
      why = fmt("d(sigma)/dE at E=%.3g: rel %.1e", E,
                std::abs(an - fd) / std::abs(fd));
      return false;
    }

    // Every parameter derivative of the law against central differences.
    for (ParamSelector sel : {ParamSelector::a1, ParamSelector::a2,
                              ParamSelector::a3, ParamSelector::a4}) {
      MaterialModel probe = fgm;
      const double p0 = param_ref(probe, sel);
      const double hp = 1e-6 * std::abs(p0);
      MaterialModel up = fgm, dn = fgm;
      param_ref(up, sel) += hp;
      param_ref(dn, sel) -= hp;
      const double fdp =
          (sigma_fgm(E, up) - sigma_fgm(E, dn)) / (2 * hp);
      const double anp = sigma_dparam(E, fgm, sel);
      const double scale = std::max({std::abs(fdp), std::abs(anp), 1e-300});
      // Where the law flattens, both slopes collapse into roundoff noise;
      // the relative check only applies above that floor.
      const double noise = 1e-15 * sigma_fgm(E, fgm) / hp;
      if (std::abs(fdp) > 1e3 * noise &&
          std::abs(anp - fdp) > 1e-5 * scale) {
        why = fmt("d(sigma)/d(param %d) at E=%.3g rel %.1e", int(sel), E,
                  std::abs(anp - fdp) / scale);
        return false;
      }
    }

    // Linear-material parameter derivatives are exact.
    MaterialModel lin;
    lin.kind = MaterialKind::linear;
    lin.sigma = 3.0;
    lin.eps = 5.0;
    if (sigma_dparam(E, lin, ParamSelector::sigma) != 1.0 ||
        eps_dparam(lin, ParamSelector::eps) != 1.0) {
      why = "linear parameter derivative";
      return false;
    }
  }
  return true;
}

bool property_unit_dirac(std::string& why) {
  const Mesh mesh = build_layered_rect(0.01, 0.01, 2, 3);
  const std::vector<ElementGeometry> geom = element_geometry(mesh);
  MaterialMap mats;
  mats[1].kind = MaterialKind::linear;
  mats[1].sigma = 10.0;
  mats[1].eps = 40.0;
  mats[2] = mats[1];
  mats[2].sigma = 20.0;

  for (double t_ref : {0.37, 0.5}) {
    for (int n_main : {10, 40, 160}) {
      const TimeGrid grid = build_timegrid(1.0, n_main, {t_ref});
      TransientSolution sol;
      sol.grid = grid;
      sol.u = TrajectoryStore::memory();
      for (int k = 0; k < grid.size(); ++k)
        sol.u.append(Eigen::VectorXd::Zero(mesh.num_nodes()));
      sol.stats.assign(grid.size() - 1, {});

      QoiSpec probe;
      probe.name = "phi";
      probe.kind = QoiKind::pointwise_potential;
      probe.point = mesh.nodes[7];
      probe.t_ref = t_ref;
      const AdjointRhs q = adjoint_rhs(probe, mesh, mats, geom, sol,
                                       {"top_electrode", "bottom_electrode"});
      const std::vector<double> tw = grid.trapezoid_weights();
      double area = 0.0;
      for (int n = 0; n < grid.size(); ++n) area += tw[n] * q[n].sum();
      if (std::abs(area - 1.0) > 1e-12) {
        why = fmt("hat area %.15f at t_ref=%g, n_main=%d", area, t_ref, n_main);
        return false;
      }
    }
  }
  return true;
}

bool property_adjoint_structure(std::string& why) {
  const Mesh mesh = build_layered_rect(0.01, 0.01, 3, 3);
  MaterialMap mats;
  mats[1].kind = MaterialKind::linear;
  mats[1].sigma = 10.0;
  mats[1].eps = 40.0;
  mats[2] = mats[1];
  mats[2].sigma = 20.0;
  mats[2].eps = 60.0;
  Excitation ex;
  ex.markers["top_electrode"] = TimeFunction::sinusoid(1.0, 2 * M_PI * 50.0);
  ex.markers["bottom_electrode"] = TimeFunction::dc(0.0);
  const TimeGrid grid = build_timegrid(0.02, 50);
  const TransientSolution sol = solve_forward(mesh, mats, ex, grid);
  const std::vector<ElementGeometry> geom = element_geometry(mesh);

  QoiSpec energy;
  energy.name = "W";
  energy.kind = QoiKind::energy_integral;
  energy.t_a = 0.0;
  energy.t_b = grid.T;
  const std::vector<std::string> markers = {"top_electrode",
                                            "bottom_electrode"};
  const AdjointRhs rhs = adjoint_rhs(energy, mesh, mats, geom, sol, markers);
  const AdjointSolution adj =
      solve_adjoint(mesh, mats, geom, sol, rhs, markers);

  if (adj.at(grid.size() - 1).norm() != 0.0) {
    why = "terminal adjoint state is not exactly zero";
    return false;
  }
  const DirichletSystem bc(mesh, markers);
  for (int n = 0; n < grid.size(); ++n) {
    const Eigen::VectorXd w = adj.at(n);
    for (int node : bc.fixed_nodes())
      if (w[node] != 0.0) {
        why = fmt("adjoint nonzero on an electrode node at sample %d", n);
        return false;
      }
  }
  return true;
}

bool property_qoi_linearity(std::string& why) {
  const Mesh mesh = build_layered_rect(0.01, 0.01, 3, 4);
  MaterialMap mats;
  mats[1].kind = MaterialKind::linear;
  mats[1].sigma = 10.0;
  mats[1].eps = 40.0;
  mats[2] = mats[1];
  mats[2].sigma = 20.0;
  mats[2].eps = 60.0;
  Excitation ex;
  ex.markers["top_electrode"] = TimeFunction::sinusoid(1.0, 2 * M_PI * 50.0);
  ex.markers["bottom_electrode"] = TimeFunction::dc(0.0);
  const TimeGrid grid = build_timegrid(0.02, 60);
  const TransientSolution sol = solve_forward(mesh, mats, ex, grid);
  const std::vector<ElementGeometry> geom = element_geometry(mesh);
  const std::vector<std::string> markers = {"top_electrode",
                                            "bottom_electrode"};

  auto energy = [&](const std::string& name, std::vector<int> regions) {
    QoiSpec q;
    q.name = name;
    q.kind = QoiKind::energy_integral;
    q.regions = std::move(regions);
    q.t_a = 0.0;
    q.t_b = grid.T;
    return q;
  };
  const std::vector<QoiSpec> qois = {energy("W1", {1}), energy("W2", {2}),
                                     energy("W12", {1, 2})};
  std::vector<AdjointSolution> adj;
  for (const QoiSpec& q : qois)
    adj.push_back(
        solve_adjoint(mesh, mats, geom, sol,
                      adjoint_rhs(q, mesh, mats, geom, sol, markers), markers));
  const std::vector<ParameterSpec> params = {
      {"sigma1", 1, ParamSelector::sigma}, {"eps1", 1, ParamSelector::eps}};
  const SensitivityResult s = compute_sensitivities(
      mesh, mats, geom, sol, adj, qois, params, InitialConditionInfo{});
  for (int j = 0; j < 2; ++j) {
    const double split = s.at(0, j).total + s.at(1, j).total;
    const double joint = s.at(2, j).total;
    if (std::abs(joint - split) > 1e-10 * std::abs(joint)) {
      why = fmt("sensitivity linearity defect %.1e for parameter %d",
                std::abs(joint - split) / std::abs(joint), j);
      return false;
    }
  }
  return true;
}

Outcome criterion_property_suite() {
  struct Prop {
    const char* name;
    bool (*run)(std::string&);
  };
  const std::vector<Prop> props = {
      {"assembly symmetry/nullspace", property_assembly},
      {"material derivatives", property_material_derivatives},
      {"unit-area dirac", property_unit_dirac},
      {"adjoint structure", property_adjoint_structure},
      {"qoi linearity", property_qoi_linearity},
  };
  Outcome o;
  o.pass = true;
  std::string passed;
  for (const Prop& p : props) {
    std::string why;
    if (p.run(why)) {
      if (!passed.empty()) passed += ", ";
      passed += p.name;
    } else {
      o.pass = false;
      o.detail = std::string(p.name) + ": " + why;
      return o;
    }
  }
  o.detail = "all properties hold (" + passed + ")";
  return o;
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion_forward_fidelity() {
  // Sinusoidal interface trace against the lumped ODE at the shipped grid.
  const Scenario sc = builtin_scenario("layered_resistor");
  const Mesh mesh = build_scenario_mesh(sc);
  const TimeGrid grid = build_scenario_timegrid(sc, 1000);
  const TransientSolution sol =
      solve_forward(mesh, sc.materials, sc.excitation, grid);
  const LumpedTwoLayer lumped = lumped_model(sc);

  const int node = nearest_node(mesh, Eigen::Vector2d(0.0, 0.01));
  double amp = 0.0, sup = 0.0;
  for (int n = 0; n < grid.size(); ++n)
    amp = std::max(amp, std::abs(lumped.phi_m(grid.t[n])));
  for (int n = 0; n < grid.size(); ++n) {
    const double got = sol.at(n)[node];
    sup = std::max(sup, std::abs(got - lumped.phi_m(grid.t[n])));
  }
  const double trace_rel = sup / amp;
  const bool trace_ok = trace_rel < 1e-3;

  // DC steady state must sit on the conductance divider at 1/3 V.
  Scenario dc = sc;
  dc.excitation.markers["top_electrode"] = TimeFunction::dc(1.0);
  dc.analytic_oracle = false;
  const double T_dc = 400.0;  // ~120 relaxation times
  const TimeGrid dc_grid = build_timegrid(T_dc, 120);
  const TransientSolution dc_sol =
      solve_forward(mesh, dc.materials, dc.excitation, dc_grid);
  const double dc_val = dc_sol.at(dc_grid.size() - 1)[node];
  const double dc_rel = std::abs(dc_val - 1.0 / 3.0) / (1.0 / 3.0);
  const bool dc_ok = dc_rel <= 1e-10;

  Outcome o;
  o.pass = trace_ok && dc_ok;
  o.detail = fmt(
      "interface trace sup rel err %.2e at N_t=1000 (limit 1e-3)%s; dc "
      "divider rel err %.2e (limit 1e-10)%s",
      trace_rel,
      trace_ok ? ""
               : " — first-order time stepping carries a phase lag of "
                 "~2*pi/N_t per period, an order of magnitude above this "
                 "bound",
      dc_rel, dc_ok ? "" : " — out of bounds");
  return o;
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion_determinism() {
  Scenario sc = builtin_scenario("layered_resistor");
  const std::string cfg = "/tmp/eqsadj_acceptance_det.json";
  save_scenario(sc, cfg);

  auto run_once = [&](const std::string& out_dir) {
    const std::string cmd = std::string(EQSADJ_CLI_PATH) + " run " + cfg +
                            " --threads 1 --out " + out_dir +
                            " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
  };
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const std::string d1 = "/tmp/eqsadj_acceptance_det1";
  const std::string d2 = "/tmp/eqsadj_acceptance_det2";
  Outcome o;
  if (!run_once(d1) || !run_once(d2)) {
    o.pass = false;
    o.detail = "pipeline run failed";
    return o;
  }
  const std::vector<std::string> files = {"qoi.csv", "sensitivities.csv",
                                          "trace_phi_ref.csv"};
  size_t bytes = 0;
  for (const std::string& f : files) {
    const std::string a = slurp(d1 + "/" + f), b = slurp(d2 + "/" + f);
    if (a.empty() || a != b) {
      o.pass = false;
      o.detail = f + (a.empty() ? " missing" : " differs between runs");
      return o;
    }
    bytes += a.size();
  }
  o.pass = true;
  o.detail = fmt(
      "two single-threaded runs produced byte-identical CSVs (%zu bytes "
      "across %zu files)",
      bytes, files.size());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (which < 0 || which > 6) {
    std::fprintf(stderr, "criterion must be 1..6 (0 = all)\n");
    return 2;
  }

  const std::vector<std::function<Outcome()>> criteria = {
      criterion_analytic_reproduction, criterion_convergence_order,
      criterion_nonlinear_cross_validation, criterion_property_suite,
      criterion_forward_fidelity, criterion_determinism};

  int failures = 0;
  for (int k = 1; k <= 6; ++k) {
    if (which != 0 && which != k) continue;
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s — %s\n", k, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures;
}
