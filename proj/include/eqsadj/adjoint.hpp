#pragma once

#include "eqsadj/forward.hpp"
#include "eqsadj/qoi.hpp"

namespace eqsadj {

// Adjoint trajectory on the forward grid; w(T) = 0, w = 0 on the Dirichlet
// markers at every sample. Stored in reversed order (the solve marches
// backward); at(n) indexes by the forward sample number.
struct AdjointSolution {
  TimeGrid grid;
  TrajectoryStore w_reversed;

  Eigen::VectorXd at(int n) const {
    return w_reversed.get(grid.size() - 1 - n);
  }
};

// Implicit Euler on the reversed axis for
// K_sigma_d(t) w - K_eps_d(t) dw/dt = q(t), w(T) = 0. The material
// linearizations are assembled from the stored forward state at each sample;
// every reversed step is one linear solve.
AdjointSolution solve_adjoint(const Mesh& mesh, const MaterialMap& materials,
                              const std::vector<ElementGeometry>& geom,
                              const TransientSolution& solution,
                              const AdjointRhs& rhs,
                              const std::vector<std::string>& dirichlet_markers,
                              int threads = 1);

}  // namespace eqsadj
