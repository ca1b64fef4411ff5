#pragma once

#include <map>
#include <string>
#include <vector>

#include "eqsadj/sensitivity.hpp"

namespace eqsadj {

struct TimegridSpec {
  double T = 0.0;
  int n_main = 0;
  std::vector<int> sweep;  // step counts for convergence studies
  double ratio = 1e-8;     // refined spacing / main spacing
};

// Simplified cable-joint cross section (axisymmetric): conductor at rho=r0,
// XLPE up to r1, a field-grading ring on [r1,r2] x [0,fgm_end], silicone
// rubber elsewhere out to the grounded sheath at rho=r3.
struct FgmJointGeometry {
  double r0 = 0.05, r1 = 0.08, r2 = 0.09, r3 = 0.15;  // m
  double length = 0.5, fgm_end = 0.25;                // m
  int cells_r_inner = 6, cells_r_fgm = 4, cells_r_outer = 6;
  int cells_z_low = 10, cells_z_high = 10;
};

struct MeshSource {
  enum class Kind { layered_rect, fgm_joint, file };
  Kind kind = Kind::layered_rect;
  // layered_rect
  double width = 0.01, layer_thickness = 0.01;
  int nx = 4, ny_per_layer = 8;
  // fgm_joint
  FgmJointGeometry joint;
  // file
  std::string path;
};

struct RunOptions {
  double newton_tol = 1e-10;
  int max_newton = 25;
  double fd_h_rel = 1e-3;   // finite-difference oracle step
  double tolerance = 1e-2;  // check threshold on |avm-fd|/|fd|
};

struct Scenario {
  std::string name;
  MeshSource mesh_source;
  MaterialMap materials;
  Excitation excitation;
  InitialConditionInfo::Kind initial_condition = InitialConditionInfo::Kind::zero;
  TimegridSpec timegrid;
  std::vector<QoiSpec> qois;
  std::vector<ParameterSpec> parameters;
  RunOptions run;
  bool analytic_oracle = false;  // lumped two-layer closed form applies
};

// Shipped studies.
Scenario scenario_layered_resistor();
Scenario scenario_fgm_joint_simplified();
const std::vector<std::string>& builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

// Structural checks beyond what the parts validate themselves (marker and
// region references, QoI windows inside [0,T], unique names, parameter /
// material-law compatibility). Throws std::invalid_argument.
void validate_scenario(const Scenario& sc);

Mesh build_scenario_mesh(const Scenario& sc);
TimeGrid build_scenario_timegrid(const Scenario& sc, int n_main_override = -1);
std::vector<std::string> scenario_dirichlet_markers(const Scenario& sc);

double scenario_param_value(const Scenario& sc, const std::string& param_name);
void apply_param_overrides(Scenario& sc,
                           const std::map<std::string, double>& overrides);

struct ScenarioRun {
  Mesh mesh;
  std::vector<ElementGeometry> geom;
  TransientSolution solution;
  Eigen::VectorXd phi0;
  std::vector<double> qoi_values;  // declared QoI order
  SensitivityResult sens;          // empty unless with_sensitivities
};

// Full pipeline: mesh, grid, initial condition, forward solve, QoI values
// and (optionally) one adjoint solve per QoI plus the sensitivity assembly.
ScenarioRun run_scenario(const Scenario& sc, int n_main_override = -1,
                         bool with_sensitivities = true, int threads = 1);

// Forward-only QoI evaluation under parameter overrides (the finite
// difference oracle's inner loop).
Eigen::VectorXd eval_scenario_qois(const Scenario& sc,
                                   const std::map<std::string, double>& overrides,
                                   int n_main_override = -1, int threads = 1);

}  // namespace eqsadj
