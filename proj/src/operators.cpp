#include "eqsadj/operators.hpp"

namespace eqsadj {

namespace {

Eigen::Vector2d field_of(const Mesh& mesh,
                         const std::vector<ElementGeometry>& geom,
                         const Eigen::VectorXd& u, int e) {
  return -element_gradient(mesh, geom, u, e);
}

}  // namespace

SpMat assemble_K_sigma(const Mesh& mesh,
                       const std::vector<ElementGeometry>& geom,
                       const MaterialMap& materials, const Eigen::VectorXd& u,
                       int threads) {
  return assemble(
      mesh, geom,
      [&](int e) {
        const MaterialModel& m =
            material_for(materials, mesh.triangles[e].region);
        const double E = field_of(mesh, geom, u, e).norm();
        return ElementCoefficient::of(conductivity(E, m));
      },
      threads);
}

SpMat assemble_K_eps(const Mesh& mesh,
                     const std::vector<ElementGeometry>& geom,
                     const MaterialMap& materials, int threads) {
  return assemble(
      mesh, geom,
      [&](int e) {
        const MaterialModel& m =
            material_for(materials, mesh.triangles[e].region);
        return ElementCoefficient::of(permittivity(m));
      },
      threads);
}

SpMat assemble_K_sigma_d(const Mesh& mesh,
                         const std::vector<ElementGeometry>& geom,
                         const MaterialMap& materials,
                         const Eigen::VectorXd& u, int threads) {
  return assemble(
      mesh, geom,
      [&](int e) {
        const MaterialModel& m =
            material_for(materials, mesh.triangles[e].region);
        return ElementCoefficient::of(
            differential_conductivity(field_of(mesh, geom, u, e), m));
      },
      threads);
}

SpMat assemble_K_eps_d(const Mesh& mesh,
                       const std::vector<ElementGeometry>& geom,
                       const MaterialMap& materials, const Eigen::VectorXd& u,
                       int threads) {
  return assemble(
      mesh, geom,
      [&](int e) {
        const MaterialModel& m =
            material_for(materials, mesh.triangles[e].region);
        return ElementCoefficient::of(
            differential_permittivity(field_of(mesh, geom, u, e), m));
      },
      threads);
}

SpMat assemble_K_sigma_p(const Mesh& mesh,
                         const std::vector<ElementGeometry>& geom,
                         const MaterialMap& materials,
                         const Eigen::VectorXd& u, int region,
                         ParamSelector selector, int threads) {
  return assemble(
      mesh, geom,
      [&](int e) {
        if (mesh.triangles[e].region != region)
          return ElementCoefficient::of(0.0);
        const MaterialModel& m = material_for(materials, region);
        const double E = field_of(mesh, geom, u, e).norm();
        return ElementCoefficient::of(sigma_dparam(E, m, selector));
      },
      threads);
}

SpMat assemble_K_eps_p(const Mesh& mesh,
                       const std::vector<ElementGeometry>& geom,
                       const MaterialMap& materials, int region,
                       ParamSelector selector, int threads) {
  return assemble(
      mesh, geom,
      [&](int e) {
        if (mesh.triangles[e].region != region)
          return ElementCoefficient::of(0.0);
        const MaterialModel& m = material_for(materials, region);
        return ElementCoefficient::of(eps_dparam(m, selector));
      },
      threads);
}

}  // namespace eqsadj
