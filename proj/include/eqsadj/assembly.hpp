#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eqsadj/mesh.hpp"

namespace eqsadj {

using SpMat = Eigen::SparseMatrix<double>;

// Constant shape-function gradients of a linear triangle plus its
// integration weight: the area in cartesian mode, 2*pi*rho_centroid*area in
// axisymmetric mode (one-point centroid quadrature).
struct ElementGeometry {
  Eigen::Matrix<double, 2, 3> grad;  // column r = grad N_r
  double weight = 0.0;
};

std::vector<ElementGeometry> element_geometry(const Mesh& mesh);

// Per-element coefficient: scalar c (shorthand for c*I) or a symmetric 2x2
// tensor.
struct ElementCoefficient {
  bool is_scalar = true;
  double scalar = 0.0;
  Eigen::Matrix2d tensor = Eigen::Matrix2d::Zero();

  static ElementCoefficient of(double c) {
    ElementCoefficient e;
    e.is_scalar = true;
    e.scalar = c;
    return e;
  }
  static ElementCoefficient of(const Eigen::Matrix2d& t) {
    ElementCoefficient e;
    e.is_scalar = false;
    e.tensor = t;
    return e;
  }
};

using CoefficientFn = std::function<ElementCoefficient(int element)>;

// K[r,s] = sum_e integral grad N_r . C_e . grad N_s dOmega. Only the upper
// triangle is computed and mirrored, so the result is exactly symmetric.
// `threads` partitions the element loop; the accumulation order is fixed so
// results are identical for any thread count.
SpMat assemble(const Mesh& mesh, const std::vector<ElementGeometry>& geom,
               const CoefficientFn& coeff, int threads = 1);
SpMat assemble(const Mesh& mesh, const CoefficientFn& coeff, int threads = 1);
// Container form; throws std::invalid_argument when an element id is absent.
SpMat assemble(const Mesh& mesh,
               const std::map<int, ElementCoefficient>& coeff);

// Gradient of the linear interpolant of u on one element (constant there);
// the element field is E = -gradient.
Eigen::Vector2d element_gradient(const Mesh& mesh,
                                 const std::vector<ElementGeometry>& geom,
                                 const Eigen::VectorXd& u, int element);

// Free/fixed node bookkeeping for symmetric Dirichlet elimination.
class DirichletSystem {
 public:
  DirichletSystem(const Mesh& mesh, const std::vector<std::string>& markers);

  int num_nodes() const { return static_cast<int>(free_of_.size()); }
  int num_free() const { return static_cast<int>(free_nodes_.size()); }
  int num_fixed() const { return static_cast<int>(fixed_nodes_.size()); }
  bool is_fixed(int node) const { return fixed_of_[node] >= 0; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }
  const std::vector<int>& fixed_nodes() const { return fixed_nodes_; }

  SpMat reduce(const SpMat& K) const;    // K_ff
  SpMat coupling(const SpMat& K) const;  // K_fc
  Eigen::VectorXd restrict_free(const Eigen::VectorXd& full) const;
  Eigen::VectorXd restrict_fixed(const Eigen::VectorXd& full) const;
  // Full vector with x_free scattered to free nodes and the given values on
  // fixed nodes.
  Eigen::VectorXd expand(const Eigen::VectorXd& x_free,
                         const Eigen::VectorXd& fixed_values) const;
  // Fixed-node value vector from marker -> value (unlisted markers: error).
  Eigen::VectorXd fixed_values_from(
      const Mesh& mesh, const std::map<std::string, double>& values) const;

 private:
  std::vector<int> free_nodes_, fixed_nodes_;
  std::vector<int> free_of_, fixed_of_;  // node -> position or -1
};

struct ReducedSystem {
  DirichletSystem bc;
  SpMat K_ff;
  Eigen::VectorXd rhs_f;
  Eigen::VectorXd fixed_values;

  Eigen::VectorXd expand(const Eigen::VectorXd& x_free) const {
    return bc.expand(x_free, fixed_values);
  }
};

// Symmetric elimination of Dirichlet DoFs: returns the free-node system
// K_ff x_f = rhs_f - K_fc g with the prescribed values g taken from
// marker -> value.
ReducedSystem apply_dirichlet(const SpMat& K, const Eigen::VectorXd& rhs,
                              const Mesh& mesh,
                              const std::map<std::string, double>& values);

}  // namespace eqsadj
