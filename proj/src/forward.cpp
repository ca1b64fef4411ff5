#include "eqsadj/forward.hpp"

#include <Eigen/SparseCholesky>
#include <cstring>
#include <limits>
#include <map>
#include <memory>

#include "eqsadj/operators.hpp"

namespace eqsadj {

std::vector<double> element_field_magnitudes(
    const Mesh& mesh, const std::vector<ElementGeometry>& geom,
    const TransientSolution& solution, int n) {
  const Eigen::VectorXd u = solution.at(n);
  std::vector<double> out(mesh.num_triangles());
  for (int e = 0; e < mesh.num_triangles(); ++e)
    out[e] = element_gradient(mesh, geom, u, e).norm();
  return out;
}

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

Eigen::VectorXd with_fixed(const DirichletSystem& bc, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& g) {
  return bc.expand(bc.restrict_free(u), g);
}

}  // namespace

TransientSolution solve_forward(const Mesh& mesh, const MaterialMap& materials,
                                const Excitation& excitation,
                                const TimeGrid& grid,
                                const NewtonOptions& opts,
                                const Eigen::VectorXd* phi0) {
  for (const auto& [region, m] : materials) validate_material(m);
  const auto geom = element_geometry(mesh);
  std::vector<std::string> markers;
  for (const auto& [marker, f] : excitation.markers) markers.push_back(marker);
  const DirichletSystem bc(mesh, markers);
  const int n_nodes = mesh.num_nodes();
  const bool linear = all_linear(materials);

  const SpMat K_eps = assemble_K_eps(mesh, geom, materials, opts.threads);
  SpMat K_sigma_lin;
  if (linear)
    K_sigma_lin = assemble_K_sigma(mesh, geom, materials,
                                   Eigen::VectorXd::Zero(n_nodes), opts.threads);

  Eigen::VectorXd u_prev =
      phi0 != nullptr ? *phi0 : Eigen::VectorXd::Zero(n_nodes);
  if (u_prev.size() != n_nodes)
    throw std::invalid_argument("solve_forward: phi0 has wrong size");
  {
    const Eigen::VectorXd g0 =
        bc.fixed_values_from(mesh, excitation.values_at(grid.t.front()));
    u_prev = with_fixed(bc, u_prev, g0);
  }

  TransientSolution sol;
  sol.grid = grid;
  sol.u = TrajectoryStore::make_default();
  sol.u.append(u_prev);
  sol.stats.reserve(grid.size() - 1);

  // Frozen-pattern factorizations: one cache entry per distinct step size in
  // the all-linear case, a single pattern-analyzed solver otherwise.
  std::map<std::uint64_t, std::unique_ptr<Ldlt>> linear_cache;
  Ldlt nonlinear_solver;
  bool pattern_done = false;

  auto residual_free = [&](const Eigen::VectorXd& u,
                           const Eigen::VectorXd& u_old, double dt,
                           const SpMat& K_sigma) {
    const Eigen::VectorXd R =
        K_sigma * u + (K_eps * (u - u_old)) / dt;
    return bc.restrict_free(R);
  };

  for (int n = 1; n < grid.size(); ++n) {
    const double dt = grid.t[n] - grid.t[n - 1];
    const Eigen::VectorXd g =
        bc.fixed_values_from(mesh, excitation.values_at(grid.t[n]));
    Eigen::VectorXd u = with_fixed(bc, u_prev, g);

    SpMat K_sigma = linear ? K_sigma_lin
                           : assemble_K_sigma(mesh, geom, materials, u,
                                              opts.threads);
    // Residual at the pure-lift state (free values zeroed) is minus the
    // right-hand side of the reduced step system, Dirichlet coupling
    // included; it scales the relative convergence test.
    const Eigen::VectorXd lift =
        bc.expand(Eigen::VectorXd::Zero(bc.num_free()), g);
    const double scale =
        1.0 + residual_free(lift, u_prev, dt, K_sigma).norm();
    Eigen::VectorXd r_f = residual_free(u, u_prev, dt, K_sigma);
    double rnorm = r_f.norm();
    int iterations = 0;

    while (rnorm > opts.tol * scale) {
      if (iterations >= opts.max_iter)
        throw SolverError(n, "newton did not converge at step " +
                                 std::to_string(n) + " (t = " +
                                 std::to_string(grid.t[n]) + ", residual " +
                                 std::to_string(rnorm) + ")");
      Eigen::VectorXd delta_f;
      if (linear) {
        const std::uint64_t key = bits_of(dt);
        auto it = linear_cache.find(key);
        if (it == linear_cache.end()) {
          const SpMat J_ff = bc.reduce(SpMat(K_sigma_lin + K_eps / dt));
          auto solver = std::make_unique<Ldlt>();
          solver->compute(J_ff);
          if (solver->info() != Eigen::Success)
            throw SolverError(n, "singular step matrix at step " +
                                     std::to_string(n));
          it = linear_cache.emplace(key, std::move(solver)).first;
        }
        delta_f = it->second->solve(r_f);
      } else {
        const SpMat K_sd =
            assemble_K_sigma_d(mesh, geom, materials, u, opts.threads);
        const SpMat K_ed =
            assemble_K_eps_d(mesh, geom, materials, u, opts.threads);
        const SpMat J_ff = bc.reduce(SpMat(K_sd + K_ed / dt));
        if (!pattern_done) {
          nonlinear_solver.analyzePattern(J_ff);
          pattern_done = true;
        }
        nonlinear_solver.factorize(J_ff);
        if (nonlinear_solver.info() != Eigen::Success)
          throw SolverError(n, "singular step matrix at step " +
                                   std::to_string(n));
        delta_f = nonlinear_solver.solve(r_f);
      }

      // Half-stepping on residual increase.
      double step = 1.0;
      Eigen::VectorXd best_u;
      Eigen::VectorXd best_r;
      double best_norm = std::numeric_limits<double>::infinity();
      for (int h = 0; h <= opts.max_halvings; ++h) {
        const Eigen::VectorXd u_trial =
            bc.expand(bc.restrict_free(u) - step * delta_f, g);
        const SpMat K_trial =
            linear ? K_sigma_lin
                   : assemble_K_sigma(mesh, geom, materials, u_trial,
                                      opts.threads);
        const Eigen::VectorXd r_trial =
            residual_free(u_trial, u_prev, dt, K_trial);
        const double n_trial = r_trial.norm();
        if (n_trial < best_norm) {
          best_norm = n_trial;
          best_u = u_trial;
          best_r = r_trial;
          if (!linear) K_sigma = K_trial;
        }
        if (n_trial < rnorm) break;
        step *= 0.5;
      }
      u = best_u;
      r_f = best_r;
      rnorm = best_norm;
      ++iterations;
    }

    sol.stats.push_back({iterations, rnorm});
    sol.u.append(u);
    u_prev = u;
  }
  return sol;
}

Eigen::VectorXd solve_stationary(const Mesh& mesh,
                                 const MaterialMap& materials,
                                 const std::map<std::string, double>& bc_values,
                                 const NewtonOptions& opts) {
  for (const auto& [region, m] : materials) validate_material(m);
  const auto geom = element_geometry(mesh);
  std::vector<std::string> markers;
  for (const auto& [marker, value] : bc_values) markers.push_back(marker);
  const DirichletSystem bc(mesh, markers);
  const int n_nodes = mesh.num_nodes();

  auto newton = [&](const std::map<std::string, double>& values,
                    Eigen::VectorXd u) {
    const Eigen::VectorXd g = bc.fixed_values_from(mesh, values);
    const Eigen::VectorXd lift =
        bc.expand(Eigen::VectorXd::Zero(bc.num_free()), g);
    u = with_fixed(bc, u, g);
    Ldlt solver;
    bool pattern_done = false;
    for (int it = 0;; ++it) {
      const SpMat K =
          assemble_K_sigma(mesh, geom, materials, u, opts.threads);
      const Eigen::VectorXd r_f = bc.restrict_free(K * u);
      const double scale = bc.restrict_free(K * lift).norm() + 1e-300;
      if (r_f.norm() <= opts.tol * scale) return u;
      if (it >= opts.max_iter)
        throw SolverError(-1, "stationary newton did not converge (residual " +
                                  std::to_string(r_f.norm()) + ")");
      const SpMat J_ff =
          bc.reduce(assemble_K_sigma_d(mesh, geom, materials, u, opts.threads));
      if (!pattern_done) {
        solver.analyzePattern(J_ff);
        pattern_done = true;
      }
      solver.factorize(J_ff);
      if (solver.info() != Eigen::Success)
        throw SolverError(-1, "singular stationary matrix");
      const Eigen::VectorXd delta_f = solver.solve(r_f);
      double step = 1.0;
      const double rnorm = r_f.norm();
      Eigen::VectorXd best_u = u;
      double best_norm = std::numeric_limits<double>::infinity();
      for (int h = 0; h <= opts.max_halvings; ++h) {
        const Eigen::VectorXd u_trial =
            bc.expand(bc.restrict_free(u) - step * delta_f, g);
        const SpMat K_trial =
            assemble_K_sigma(mesh, geom, materials, u_trial, opts.threads);
        const double n_trial = bc.restrict_free(K_trial * u_trial).norm();
        if (n_trial < best_norm) {
          best_norm = n_trial;
          best_u = u_trial;
        }
        if (n_trial < rnorm) break;
        step *= 0.5;
      }
      u = best_u;
    }
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_nodes);
  try {
    return newton(bc_values, u);
  } catch (const SolverError&) {
    // Voltage-ramp continuation for hard nonlinear operating points.
    for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
      std::map<std::string, double> scaled;
      for (const auto& [marker, value] : bc_values)
        scaled[marker] = alpha * value;
      u = newton(scaled, u);
    }
    return u;
  }
}

}  // namespace eqsadj
