#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eqsadj/scenario.hpp"

#include <Eigen/Core>

namespace eqsadj {

// Exact scalar model of the series two-layer stack: current-density
// continuity at the interface gives
//   (eps1+eps2) d(phi_m)/dt + (sigma1+sigma2) phi_m = sigma1 U + eps1 dU/dt
// with phi_m(0) = 0. Layer 1 is adjacent to the excited electrode. Closed
// forms cover dc and sinusoid excitations; time integrals use adaptive
// Simpson quadrature driven to ~1e-13 (treated as exact at test tolerances).
struct LumpedTwoLayer {
  double sigma1 = 0.0, sigma2 = 0.0;
  double eps1 = 0.0, eps2 = 0.0;
  double d = 0.0;      // per-layer thickness
  double width = 1.0;  // lateral extent of the 2D section
  TimeFunction U;

  double phi_m(double t) const;
  double dphi_m_deps1(double t) const;
  double dphi_m_dsigma1(double t) const;

  // Potential in the middle of layer 1: (U + phi_m)/2.
  double phi_ref(double t) const;
  double dphi_ref_deps1(double t) const;
  double dphi_ref_dsigma1(double t) const;

  // Dissipated energy over [ta, tb] for the full two-layer section.
  double W_el(double ta, double tb) const;
  double dW_el_dsigma1(double ta, double tb) const;
  double dW_el_deps1(double ta, double tb) const;

  // RK4 integration of the interface ODE (independent cross-check of the
  // closed forms).
  double phi_m_rk4(double t_end, int steps) const;
};

struct OracleReport {
  std::string qoi;
  std::string param;
  double value = 0.0;       // central difference at step h
  double value_half = 0.0;  // central difference at h/2
  double richardson = 0.0;  // (4*value_half - value)/3
  double h = 0.0;
  double spread_rel = 0.0;  // |value - value_half| relative to richardson
  bool reliable = true;     // spread below the configured threshold
};

// Evaluates every QoI of a scenario at one value of a single parameter.
using ScenarioQoiFn = std::function<Eigen::VectorXd(double p_value)>;

inline constexpr double p_floor = 1e-12;  // step floor for zero nominals

// Central finite differences over full evaluations at p0 +- h and p0 +- h/2
// with h = h_rel * max(|p0|, p_floor); one report per QoI name. `threads`
// > 1 runs the four evaluations concurrently.
std::vector<OracleReport> fd_sensitivity(const ScenarioQoiFn& eval,
                                         const std::vector<std::string>& qoi_names,
                                         const std::string& param_name,
                                         double p0, double h_rel,
                                         double spread_tol = 0.01,
                                         int threads = 1);

// Scenario-level finite differences: each evaluation re-solves the forward
// problem with the parameter overridden.
std::vector<OracleReport> fd_sensitivity(const Scenario& sc,
                                         const std::string& param_name,
                                         int n_main_override = -1,
                                         int threads = 1);

// Maps a scenario flagged analytic_oracle (two equal layers, driven top
// electrode) onto the lumped model. Throws std::invalid_argument when the
// scenario, QoI, or parameter falls outside what the closed forms cover.
LumpedTwoLayer lumped_model(const Scenario& sc);
double lumped_reference_value(const Scenario& sc, const QoiSpec& qoi);
double lumped_reference_sensitivity(const Scenario& sc, const QoiSpec& qoi,
                                    const ParameterSpec& param);

}  // namespace eqsadj
