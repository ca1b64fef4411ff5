#pragma once

#include "eqsadj/assembly.hpp"
#include "eqsadj/materials.hpp"

namespace eqsadj {

// FE operators evaluated at a nodal state u: the element field is the
// constant E = -grad(phi) of the linear interpolant, materials are looked up
// per region.

SpMat assemble_K_sigma(const Mesh& mesh,
                       const std::vector<ElementGeometry>& geom,
                       const MaterialMap& materials, const Eigen::VectorXd& u,
                       int threads = 1);

SpMat assemble_K_eps(const Mesh& mesh, const std::vector<ElementGeometry>& geom,
                     const MaterialMap& materials, int threads = 1);

SpMat assemble_K_sigma_d(const Mesh& mesh,
                         const std::vector<ElementGeometry>& geom,
                         const MaterialMap& materials,
                         const Eigen::VectorXd& u, int threads = 1);

SpMat assemble_K_eps_d(const Mesh& mesh,
                       const std::vector<ElementGeometry>& geom,
                       const MaterialMap& materials, const Eigen::VectorXd& u,
                       int threads = 1);

// d K_sigma / d p or d K_eps / d p at fixed u for the parameter
// (region, selector); elements outside the region contribute zero.
SpMat assemble_K_sigma_p(const Mesh& mesh,
                         const std::vector<ElementGeometry>& geom,
                         const MaterialMap& materials,
                         const Eigen::VectorXd& u, int region,
                         ParamSelector selector, int threads = 1);

SpMat assemble_K_eps_p(const Mesh& mesh,
                       const std::vector<ElementGeometry>& geom,
                       const MaterialMap& materials, int region,
                       ParamSelector selector, int threads = 1);

}  // namespace eqsadj
