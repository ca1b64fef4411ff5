#pragma once

#include <string>
#include <vector>

#include "eqsadj/adjoint.hpp"

namespace eqsadj {

struct ParameterSpec {
  std::string name;
  int region = 0;
  ParamSelector select = ParamSelector::sigma;
};

// How the initial condition depends on the parameters: u'(0) = d(phi0)/dp.
struct InitialConditionInfo {
  enum class Kind {
    zero,           // phi0 = 0: u'(0) = 0
    dc_steady,      // phi0 solves K_sigma(u)u = 0: u'(0) from the linearized
                    // stationary system K_sigma_d u' = -K_sigma_p u0
    scaled_profile  // phi0 = p * profile for the named parameter
  };
  Kind kind = Kind::zero;
  Eigen::VectorXd profile;
  std::string scale_param;
  std::vector<std::string> dirichlet_markers;  // for the dc_steady solve
};

struct SensitivityEntry {
  double total = 0.0;
  double volume_sigma = 0.0;   // trapezoid of -u^T K_sigma_p w
  double volume_eps = 0.0;     // trapezoid of  u^T K_eps_p dw/dt
  double explicit_dgdp = 0.0;  // trapezoid of the explicit dg/dp integral
  double t0_eps = 0.0;         // u^T K_eps_p w at t = 0
  double t0_init = 0.0;        // u'(0)^T K_eps_d w at t = 0
};

struct SensitivityResult {
  std::vector<std::string> qoi_names;
  std::vector<std::string> param_names;
  std::vector<std::vector<SensitivityEntry>> entries;  // [qoi][param]
  int n_t = 0;

  const SensitivityEntry& at(int k, int j) const { return entries[k][j]; }
  Eigen::MatrixXd totals() const;
};

// Discrete sensitivity assembly: trapezoidal sum over the shared grid of
// [ dg/dp - u^T K_sigma_p w + u^T K_eps_p dw/dt ] plus the two t = 0 terms.
// dw/dt uses the adjoint solver's own first-order differences (forward in
// original time; the final sample reuses the last interval).
SensitivityResult compute_sensitivities(
    const Mesh& mesh, const MaterialMap& materials,
    const std::vector<ElementGeometry>& geom, const TransientSolution& solution,
    const std::vector<AdjointSolution>& adjoints,
    const std::vector<QoiSpec>& qois, const std::vector<ParameterSpec>& params,
    const InitialConditionInfo& ic, int threads = 1);

}  // namespace eqsadj
