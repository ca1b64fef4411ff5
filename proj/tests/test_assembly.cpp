#include <cmath>
#include <random>

#include "doctest.h"
#include "eqsadj/assembly.hpp"
#include "eqsadj/materials.hpp"
#include "eqsadj/mesh.hpp"

using namespace eqsadj;

namespace {

Mesh unit_right_triangle() {
  Mesh m;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{{0, 1, 2}, 1}};
  m.boundary_nodes["all"] = {0, 1, 2};
  return m;
}

constexpr double sigma1 = 10.0, sigma2 = 20.0;

MaterialMap layered_materials() {
  MaterialMap mm;
  MaterialModel upper;
  upper.region = 1;
  upper.kind = MaterialKind::linear;
  upper.sigma = sigma1;
  upper.eps = 40.0;
  MaterialModel lower = upper;
  lower.region = 2;
  lower.sigma = sigma2;
  lower.eps = 60.0;
  mm[1] = upper;
  mm[2] = lower;
  return mm;
}

// Assemble K_sigma from the per-element conductivity of the material map.
SpMat assemble_sigma(const Mesh& mesh, const MaterialMap& mats) {
  return assemble(mesh, [&](int e) {
    return ElementCoefficient::of(
        material_for(mats, mesh.triangles[e].region).sigma);
  });
}

}  // namespace

TEST_CASE("unit right triangle element matrix") {
  const Mesh m = unit_right_triangle();
  const SpMat K = assemble(m, [](int) { return ElementCoefficient::of(1.0); });
  Eigen::Matrix3d expected;
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  const Eigen::Matrix3d dense = Eigen::MatrixXd(K);
  CHECK((dense - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("row sums vanish for constant coefficients") {
  const Mesh m = build_layered_rect(0.013, 0.01, 3, 4);
  const SpMat K = assemble(m, [](int) { return ElementCoefficient::of(1.0); });
  const Eigen::VectorXd row_sums =
      Eigen::MatrixXd(K).rowwise().sum().cwiseAbs();
  CHECK(row_sums.maxCoeff() <= 1e-14 * Eigen::MatrixXd(K).cwiseAbs().maxCoeff() *
                                   m.num_nodes());
}

TEST_CASE("identity tensor reproduces scalar assembly bitwise") {
  const Mesh m = build_layered_rect(0.01, 0.01, 2, 3);
  const double c = 3.7;
  const SpMat Ks = assemble(m, [&](int) { return ElementCoefficient::of(c); });
  const SpMat Kt = assemble(m, [&](int) {
    return ElementCoefficient::of(
        Eigen::Matrix2d(c * Eigen::Matrix2d::Identity()));
  });
  const Eigen::MatrixXd diff = Eigen::MatrixXd(Ks) - Eigen::MatrixXd(Kt);
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembled matrices are exactly symmetric") {
  const Mesh m = build_layered_rect(0.01, 0.01, 3, 3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  std::vector<Eigen::Matrix2d> coeffs(m.num_triangles());
  for (auto& t : coeffs) {
    const double a = uni(rng), b = uni(rng), c = 0.3 * uni(rng);
    t << a, c, c, b;
  }
  const SpMat K =
      assemble(m, [&](int e) { return ElementCoefficient::of(coeffs[e]); });
  const Eigen::MatrixXd dense = Eigen::MatrixXd(K);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("positive semidefinite for PSD coefficients") {
  const Mesh m = build_layered_rect(0.01, 0.01, 4, 4);
  const SpMat K = assemble_sigma(m, layered_materials());
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  const double k_norm = Eigen::MatrixXd(K).cwiseAbs().maxCoeff();
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(m.num_nodes());
    for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    CHECK(x.dot(K * x) >= -1e-12 * k_norm * x.squaredNorm());
  }
}

TEST_CASE("element gradients of linear fields are exact") {
  const Mesh m = build_layered_rect(0.01, 0.01, 3, 2);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_nodes());
  Eigen::VectorXd xcoord(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) xcoord[i] = m.nodes[i].x();
  const std::vector<ElementGeometry> geom = element_geometry(m);
  for (int e = 0; e < m.num_triangles(); ++e) {
    CHECK(element_gradient(m, geom, ones, e).norm() <= 1e-13);
    const Eigen::Vector2d g = element_gradient(m, geom, xcoord, e);
    CHECK(g.x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g.y()) <= 1e-12);
  }
}

TEST_CASE("dirichlet elimination") {
  const Mesh m = build_layered_rect(0.01, 0.01, 2, 2);
  const SpMat K = assemble_sigma(m, layered_materials());

  SUBCASE("unknown marker throws") {
    CHECK_THROWS_AS(DirichletSystem(m, {"nonexistent"}),
                    std::invalid_argument);
  }
  SUBCASE("zero data gives the zero solution") {
    ReducedSystem sys =
        apply_dirichlet(K, Eigen::VectorXd::Zero(m.num_nodes()), m,
                        {{"top_electrode", 0.0}, {"bottom_electrode", 0.0}});
    Eigen::SimplicialLDLT<SpMat> solver(sys.K_ff);
    const Eigen::VectorXd u = sys.expand(solver.solve(sys.rhs_f));
    CHECK(u.norm() == 0.0);
  }
  SUBCASE("uniform conductivity gives a linear profile") {
    MaterialMap mats = layered_materials();
    mats[2].sigma = mats[1].sigma;  // uniform
    const SpMat Ku = assemble_sigma(m, mats);
    ReducedSystem sys =
        apply_dirichlet(Ku, Eigen::VectorXd::Zero(m.num_nodes()), m,
                        {{"top_electrode", 1.0}, {"bottom_electrode", 0.0}});
    Eigen::SimplicialLDLT<SpMat> solver(sys.K_ff);
    const Eigen::VectorXd u = sys.expand(solver.solve(sys.rhs_f));
    const double height = 0.02;
    for (int i = 0; i < m.num_nodes(); ++i)
      CHECK(u[i] == doctest::Approx(m.nodes[i].y() / height).epsilon(1e-12));
  }
}

TEST_CASE("two-layer series conductance is reproduced exactly") {
  const double width = 0.01, d = 0.01;
  const Mesh m = build_layered_rect(width, d, 4, 6);
  const SpMat K = assemble_sigma(m, layered_materials());
  ReducedSystem sys =
      apply_dirichlet(K, Eigen::VectorXd::Zero(m.num_nodes()), m,
                      {{"top_electrode", 1.0}, {"bottom_electrode", 0.0}});
  Eigen::SimplicialLDLT<SpMat> solver(sys.K_ff);
  const Eigen::VectorXd u = sys.expand(solver.solve(sys.rhs_f));

  // reaction current through the bottom electrode at 1 V drive
  const Eigen::VectorXd r = K * u;
  double current = 0.0;
  for (int i : m.boundary_nodes.at("bottom_electrode")) current += r[i];
  const double expected = sigma1 * sigma2 * width / (d * (sigma1 + sigma2));
  CHECK(std::abs(-current - expected) <= 1e-12 * expected);
}

TEST_CASE("axisymmetric annulus conductance converges under refinement") {
  const double r0 = 0.05, r1 = 0.15, height = 0.1, sigma = 2.5;
  const double analytic = 2.0 * M_PI * sigma * height / std::log(r1 / r0);

  auto conductance = [&](int cells_r) {
    const Mesh m = build_structured_rect(
        {r0, r1}, {cells_r}, {0.0, height}, {4}, [](double, double) { return 1; },
        Symmetry::axisymmetric);
    Mesh marked = m;
    std::vector<int> inner, outer;
    for (int i = 0; i < m.num_nodes(); ++i) {
      if (std::abs(m.nodes[i].x() - r0) < 1e-14) inner.push_back(i);
      if (std::abs(m.nodes[i].x() - r1) < 1e-14) outer.push_back(i);
    }
    marked.boundary_nodes["inner"] = inner;
    marked.boundary_nodes["outer"] = outer;
    const SpMat K =
        assemble(marked, [&](int) { return ElementCoefficient::of(sigma); });
    ReducedSystem sys =
        apply_dirichlet(K, Eigen::VectorXd::Zero(marked.num_nodes()), marked,
                        {{"inner", 1.0}, {"outer", 0.0}});
    Eigen::SimplicialLDLT<SpMat> solver(sys.K_ff);
    const Eigen::VectorXd u = sys.expand(solver.solve(sys.rhs_f));
    const Eigen::VectorXd r = K * u;
    double current = 0.0;
    for (int i : outer) current += r[i];
    return -current;
  };

  const double err_coarse = std::abs(conductance(8) - analytic) / analytic;
  const double err_fine = std::abs(conductance(32) - analytic) / analytic;
  CHECK(err_fine < err_coarse);
  CHECK(err_fine <= 1e-3);
}
