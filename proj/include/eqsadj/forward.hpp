#pragma once

#include <stdexcept>
#include <vector>

#include "eqsadj/assembly.hpp"
#include "eqsadj/excitation.hpp"
#include "eqsadj/materials.hpp"
#include "eqsadj/mesh.hpp"
#include "eqsadj/store.hpp"
#include "eqsadj/timegrid.hpp"

namespace eqsadj {

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 25;
  int max_halvings = 8;
  int threads = 1;
};

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
};

// Carries the failing step index (or -1 for stationary solves).
struct SolverError : std::runtime_error {
  int step;
  SolverError(int step_, const std::string& what)
      : std::runtime_error(what), step(step_) {}
};

struct TransientSolution {
  TimeGrid grid;
  TrajectoryStore u;             // nodal vector per grid sample
  std::vector<StepStats> stats;  // per step, size grid.size()-1

  Eigen::VectorXd at(int n) const { return u.get(n); }
};

// Per-element |E| at sample n (constant per linear triangle).
std::vector<double> element_field_magnitudes(
    const Mesh& mesh, const std::vector<ElementGeometry>& geom,
    const TransientSolution& solution, int n);

// Implicit Euler with per-step Newton. The residual at step n is
// R = K_sigma(u) u + (K_eps u - K_eps u_prev)/dt with Dirichlet rows
// eliminated; convergence when |R|_2 <= tol * (1 + |rhs|_2) where rhs is the
// right-hand side of the reduced step system (history term plus Dirichlet
// coupling). phi0 is the initial condition (zero when null); Dirichlet nodes
// carry the excitation value at every sample.
TransientSolution solve_forward(const Mesh& mesh, const MaterialMap& materials,
                                const Excitation& excitation,
                                const TimeGrid& grid,
                                const NewtonOptions& opts = {},
                                const Eigen::VectorXd* phi0 = nullptr);

// Stationary nonlinear problem K_sigma(u) u = 0 with Dirichlet data (DC
// operating point). Newton with damping plus a voltage-ramp fallback.
Eigen::VectorXd solve_stationary(const Mesh& mesh,
                                 const MaterialMap& materials,
                                 const std::map<std::string, double>& bc_values,
                                 const NewtonOptions& opts = {});

}  // namespace eqsadj
