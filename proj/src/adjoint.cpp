#include "eqsadj/adjoint.hpp"

#include <Eigen/SparseCholesky>
#include <cstring>
#include <map>
#include <memory>

#include "eqsadj/operators.hpp"

namespace eqsadj {

namespace {

using Ldlt = Eigen::SimplicialLDLT<SpMat>;

std::uint64_t bits_of(double x) {
  std::uint64_t k;
  std::memcpy(&k, &x, sizeof k);
  return k;
}

bool all_linear(const MaterialMap& materials) {
  for (const auto& [region, m] : materials)
    if (m.kind != MaterialKind::linear) return false;
  return true;
}

}  // namespace

AdjointSolution solve_adjoint(const Mesh& mesh, const MaterialMap& materials,
                              const std::vector<ElementGeometry>& geom,
                              const TransientSolution& solution,
                              const AdjointRhs& rhs,
                              const std::vector<std::string>& dirichlet_markers,
                              int threads) {
  const TimeGrid& grid = solution.grid;
  const int N = grid.size();
  if (static_cast<int>(rhs.size()) != N)
    throw std::invalid_argument("solve_adjoint: rhs not on the solution grid");
  const DirichletSystem bc(mesh, dirichlet_markers);
  const int n_nodes = mesh.num_nodes();
  const bool linear = all_linear(materials);

  AdjointSolution adj;
  adj.grid = grid;
  adj.w_reversed = TrajectoryStore::make_default();

  Eigen::VectorXd w_next = Eigen::VectorXd::Zero(n_nodes);  // w(T) = 0
  adj.w_reversed.append(w_next);

  std::map<std::uint64_t, std::unique_ptr<Ldlt>> cache;
  Ldlt solver;
  bool pattern_done = false;
  SpMat K_sd_lin, K_ed_lin;
  if (linear) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n_nodes);
    K_sd_lin = assemble_K_sigma_d(mesh, geom, materials, zero, threads);
    K_ed_lin = assemble_K_eps_d(mesh, geom, materials, zero, threads);
  }

  for (int n = N - 2; n >= 0; --n) {
    const double dt = grid.t[n + 1] - grid.t[n];
    SpMat K_sd, K_ed;
    if (linear) {
      K_sd = K_sd_lin;
      K_ed = K_ed_lin;
    } else {
      const Eigen::VectorXd u_n = solution.at(n);
      K_sd = assemble_K_sigma_d(mesh, geom, materials, u_n, threads);
      K_ed = assemble_K_eps_d(mesh, geom, materials, u_n, threads);
    }
    const Eigen::VectorXd rhs_full = rhs[n] + (K_ed * w_next) / dt;
    const Eigen::VectorXd rhs_f = bc.restrict_free(rhs_full);

    Eigen::VectorXd w_f;
    if (linear) {
      const std::uint64_t key = bits_of(dt);
      auto it = cache.find(key);
      if (it == cache.end()) {
        const SpMat A_ff = bc.reduce(SpMat(K_sd + K_ed / dt));
        auto s = std::make_unique<Ldlt>();
        s->compute(A_ff);
        if (s->info() != Eigen::Success)
          throw SolverError(n, "singular adjoint step matrix at sample " +
                                   std::to_string(n));
        it = cache.emplace(key, std::move(s)).first;
      }
      w_f = it->second->solve(rhs_f);
    } else {
      const SpMat A_ff = bc.reduce(SpMat(K_sd + K_ed / dt));
      if (!pattern_done) {
        solver.analyzePattern(A_ff);
        pattern_done = true;
      }
      solver.factorize(A_ff);
      if (solver.info() != Eigen::Success)
        throw SolverError(n, "singular adjoint step matrix at sample " +
                                 std::to_string(n));
      w_f = solver.solve(rhs_f);
    }

    w_next = bc.expand(w_f, Eigen::VectorXd::Zero(bc.num_fixed()));
    adj.w_reversed.append(w_next);
  }
  return adj;
}

}  // namespace eqsadj
