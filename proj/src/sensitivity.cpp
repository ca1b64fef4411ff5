#include "eqsadj/sensitivity.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>

#include "eqsadj/operators.hpp"

namespace eqsadj {

Eigen::MatrixXd SensitivityResult::totals() const {
  Eigen::MatrixXd out(qoi_names.size(), param_names.size());
  for (size_t k = 0; k < entries.size(); ++k)
    for (size_t j = 0; j < entries[k].size(); ++j)
      out(k, j) = entries[k][j].total;
  return out;
}

namespace {

double param_value(const MaterialMap& materials, const ParameterSpec& p) {
  MaterialModel m = material_for(materials, p.region);
  return param_ref(m, p.select);
}

// u'(0) for one parameter under the dc_steady initial condition: the DC
// operating point solves K_sigma(u0) u0 = 0, so differentiating,
// K_sigma_d(u0) u' = -K_sigma_p(u0) u0 with homogeneous Dirichlet data.
Eigen::VectorXd dc_state_derivative(const Mesh& mesh,
                                    const MaterialMap& materials,
                                    const std::vector<ElementGeometry>& geom,
                                    const Eigen::VectorXd& u0,
                                    const ParameterSpec& p,
                                    const std::vector<std::string>& markers,
                                    int threads) {
  const DirichletSystem bc(mesh, markers);
  const SpMat K_sd = assemble_K_sigma_d(mesh, geom, materials, u0, threads);
  const SpMat K_sp = assemble_K_sigma_p(mesh, geom, materials, u0, p.region,
                                        p.select, threads);
  Eigen::SimplicialLDLT<SpMat> solver;
  solver.compute(bc.reduce(K_sd));
  if (solver.info() != Eigen::Success)
    throw SolverError(-1, "singular matrix in dc-state derivative solve");
  const Eigen::VectorXd rhs_f = -bc.restrict_free(K_sp * u0);
  return bc.expand(solver.solve(rhs_f),
                   Eigen::VectorXd::Zero(bc.num_fixed()));
}

}  // namespace

SensitivityResult compute_sensitivities(
    const Mesh& mesh, const MaterialMap& materials,
    const std::vector<ElementGeometry>& geom, const TransientSolution& solution,
    const std::vector<AdjointSolution>& adjoints,
    const std::vector<QoiSpec>& qois, const std::vector<ParameterSpec>& params,
    const InitialConditionInfo& ic, int threads) {
  const TimeGrid& grid = solution.grid;
  const int N = grid.size();
  const int NQ = static_cast<int>(qois.size());
  const int NP = static_cast<int>(params.size());
  if (static_cast<int>(adjoints.size()) != NQ)
    throw std::invalid_argument(
        "compute_sensitivities: one adjoint trajectory per qoi required");
  for (const AdjointSolution& adj : adjoints)
    if (adj.grid.t != grid.t)
      throw std::invalid_argument(
          "compute_sensitivities: adjoint grid differs from solution grid");

  SensitivityResult result;
  for (const QoiSpec& q : qois) result.qoi_names.push_back(q.name);
  for (const ParameterSpec& p : params) result.param_names.push_back(p.name);
  result.entries.assign(NQ, std::vector<SensitivityEntry>(NP));
  result.n_t = N;

  const std::vector<double> tw = grid.trapezoid_weights();
  std::vector<std::vector<double>> wwin(NQ);
  for (int k = 0; k < NQ; ++k)
    wwin[k] = qois[k].kind == QoiKind::energy_integral
                  ? window_weights(grid, qois[k].t_a, qois[k].t_b)
                  : std::vector<double>(N, 0.0);

  // u-independent operators per parameter.
  std::vector<SpMat> K_ep(NP);
  std::vector<SpMat> K_sp_const(NP);
  std::vector<bool> sigma_active(NP, false), sp_is_const(NP, false);
  for (int j = 0; j < NP; ++j) {
    const ParameterSpec& p = params[j];
    K_ep[j] = assemble_K_eps_p(mesh, geom, materials, p.region, p.select,
                               threads);
    if (p.select != ParamSelector::eps) {
      sigma_active[j] = true;
      if (material_for(materials, p.region).kind == MaterialKind::linear) {
        sp_is_const[j] = true;
        K_sp_const[j] = assemble_K_sigma_p(
            mesh, geom, materials, Eigen::VectorXd::Zero(mesh.num_nodes()),
            p.region, p.select, threads);
      }
    }
  }

  std::vector<Eigen::VectorXd> w_cur(NQ), dwdt(NQ);

  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd u_n = solution.at(n);
    // dw/dt via the forward-in-time first-order difference; the last sample
    // reuses the final interval's value.
    for (int k = 0; k < NQ; ++k) {
      w_cur[k] = adjoints[k].at(n);
      if (n < N - 1) {
        const Eigen::VectorXd w_next = adjoints[k].at(n + 1);
        dwdt[k] = (w_next - w_cur[k]) / (grid.t[n + 1] - grid.t[n]);
      }
      // n == N-1: dwdt[k] keeps the previous interval's difference.
    }

    for (int j = 0; j < NP; ++j) {
      const ParameterSpec& p = params[j];
      SpMat K_sp;
      if (sigma_active[j])
        K_sp = sp_is_const[j]
                   ? K_sp_const[j]
                   : assemble_K_sigma_p(mesh, geom, materials, u_n, p.region,
                                        p.select, threads);
      for (int k = 0; k < NQ; ++k) {
        SensitivityEntry& entry = result.entries[k][j];
        if (sigma_active[j]) {
          entry.volume_sigma += tw[n] * -(u_n.dot(K_sp * w_cur[k]));
          if (wwin[k][n] != 0.0 &&
              (qois[k].regions.empty() ||
               std::find(qois[k].regions.begin(), qois[k].regions.end(),
                         p.region) != qois[k].regions.end()))
            entry.explicit_dgdp += wwin[k][n] * u_n.dot(K_sp * u_n);
        }
        if (p.select == ParamSelector::eps)
          entry.volume_eps += tw[n] * u_n.dot(K_ep[j] * dwdt[k]);
        if (n == 0) {
          if (p.select == ParamSelector::eps)
            entry.t0_eps += u_n.dot(K_ep[j] * w_cur[k]);
          // u'(0) contribution.
          Eigen::VectorXd u_prime;
          switch (ic.kind) {
            case InitialConditionInfo::Kind::zero:
              break;
            case InitialConditionInfo::Kind::dc_steady:
              if (sigma_active[j])
                u_prime = dc_state_derivative(mesh, materials, geom, u_n, p,
                                              ic.dirichlet_markers, threads);
              break;
            case InitialConditionInfo::Kind::scaled_profile:
              if (p.name == ic.scale_param) u_prime = ic.profile;
              break;
          }
          if (u_prime.size() > 0) {
            const SpMat K_ed =
                assemble_K_eps_d(mesh, geom, materials, u_n, threads);
            entry.t0_init += u_prime.dot(K_ed * w_cur[k]);
          }
        }
      }
    }
  }

  for (int k = 0; k < NQ; ++k) {
    for (int j = 0; j < NP; ++j) {
      SensitivityEntry& entry = result.entries[k][j];
      if (qois[k].kind == QoiKind::synthetic_quadratic) {
        entry = SensitivityEntry{};
        if (qois[k].parameter == params[j].name)
          entry.explicit_dgdp = 2.0 * param_value(materials, params[j]);
      }
      entry.total = entry.volume_sigma + entry.volume_eps +
                    entry.explicit_dgdp + entry.t0_eps + entry.t0_init;
    }
  }
  return result;
}

}  // namespace eqsadj
