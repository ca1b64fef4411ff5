#include "eqsadj/assembly.hpp"

#include <algorithm>
#include <thread>

namespace eqsadj {

std::vector<ElementGeometry> element_geometry(const Mesh& mesh) {
  std::vector<ElementGeometry> geom(mesh.num_triangles());
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const Triangle& tri = mesh.triangles[e];
    const Eigen::Vector2d& a = mesh.nodes[tri.v[0]];
    const Eigen::Vector2d& b = mesh.nodes[tri.v[1]];
    const Eigen::Vector2d& c = mesh.nodes[tri.v[2]];
    const double area = signed_area(mesh, tri);
    if (area <= 0.0)
      throw std::invalid_argument("element_geometry: non-positive area");
    ElementGeometry& g = geom[e];
    const double s = 1.0 / (2.0 * area);
    // grad N_1 = (y2 - y3, x3 - x2) / (2A), cyclic.
    g.grad.col(0) = Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) * s;
    g.grad.col(1) = Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) * s;
    g.grad.col(2) = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) * s;
    g.weight = area;
    if (mesh.symmetry == Symmetry::axisymmetric) {
      const double rho_c = (a.x() + b.x() + c.x()) / 3.0;
      g.weight *= 2.0 * M_PI * rho_c;
    }
  }
  return geom;
}

namespace {

using Triplet = Eigen::Triplet<double>;

void element_triplets(const Mesh& mesh,
                      const std::vector<ElementGeometry>& geom,
                      const CoefficientFn& coeff, int e,
                      std::vector<Triplet>& out) {
  const Triangle& tri = mesh.triangles[e];
  const ElementGeometry& g = geom[e];
  const ElementCoefficient c = coeff(e);
  // Scalars run through the identical tensor expression so that a scalar c
  // and the tensor c*I assemble bit-identical matrices.
  const Eigen::Matrix2d t =
      c.is_scalar ? Eigen::Matrix2d(c.scalar * Eigen::Matrix2d::Identity())
                  : c.tensor;
  const Eigen::Matrix3d ke = g.weight * (g.grad.transpose() * t * g.grad);
  // Upper triangle in local ordering, mirrored, so the assembled matrix is
  // exactly symmetric.
  for (int r = 0; r < 3; ++r) {
    for (int s = r; s < 3; ++s) {
      const double v = 0.5 * (ke(r, s) + ke(s, r));
      out.emplace_back(tri.v[r], tri.v[s], v);
      if (s != r) out.emplace_back(tri.v[s], tri.v[r], v);
    }
  }
}

}  // namespace

SpMat assemble(const Mesh& mesh, const std::vector<ElementGeometry>& geom,
               const CoefficientFn& coeff, int threads) {
  const int ne = mesh.num_triangles();
  if (static_cast<int>(geom.size()) != ne)
    throw std::invalid_argument("assemble: geometry/mesh mismatch");
  std::vector<Triplet> triplets;
  if (threads <= 1 || ne < 256) {
    triplets.reserve(static_cast<size_t>(ne) * 9);
    for (int e = 0; e < ne; ++e)
      element_triplets(mesh, geom, coeff, e, triplets);
  } else {
    // Contiguous element ranges per worker, merged in worker order: the
    // triplet sequence (and thus summation order) is independent of the
    // thread count.
    const int nw = std::min(threads, ne);
    std::vector<std::vector<Triplet>> parts(nw);
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) {
      const int lo = static_cast<int>(static_cast<long>(ne) * w / nw);
      const int hi = static_cast<int>(static_cast<long>(ne) * (w + 1) / nw);
      pool.emplace_back([&, w, lo, hi] {
        parts[w].reserve(static_cast<size_t>(hi - lo) * 9);
        for (int e = lo; e < hi; ++e)
          element_triplets(mesh, geom, coeff, e, parts[w]);
      });
    }
    for (auto& t : pool) t.join();
    for (auto& p : parts)
      triplets.insert(triplets.end(), p.begin(), p.end());
  }
  SpMat K(mesh.num_nodes(), mesh.num_nodes());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

SpMat assemble(const Mesh& mesh, const CoefficientFn& coeff, int threads) {
  return assemble(mesh, element_geometry(mesh), coeff, threads);
}

SpMat assemble(const Mesh& mesh,
               const std::map<int, ElementCoefficient>& coeff) {
  return assemble(mesh, [&](int e) {
    auto it = coeff.find(e);
    if (it == coeff.end())
      throw std::invalid_argument("assemble: coefficient missing for element " +
                                  std::to_string(e));
    return it->second;
  });
}

Eigen::Vector2d element_gradient(const Mesh& mesh,
                                 const std::vector<ElementGeometry>& geom,
                                 const Eigen::VectorXd& u, int element) {
  const Triangle& tri = mesh.triangles[element];
  const ElementGeometry& g = geom[element];
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  for (int r = 0; r < 3; ++r) grad += u[tri.v[r]] * g.grad.col(r);
  return grad;
}

DirichletSystem::DirichletSystem(const Mesh& mesh,
                                 const std::vector<std::string>& markers) {
  const int n = mesh.num_nodes();
  free_of_.assign(n, -1);
  fixed_of_.assign(n, -1);
  std::vector<char> fixed(n, 0);
  for (const std::string& marker : markers) {
    auto it = mesh.boundary_nodes.find(marker);
    if (it == mesh.boundary_nodes.end())
      throw std::invalid_argument("unknown boundary marker '" + marker + "'");
    for (int i : it->second) fixed[i] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) {
      fixed_of_[i] = static_cast<int>(fixed_nodes_.size());
      fixed_nodes_.push_back(i);
    } else {
      free_of_[i] = static_cast<int>(free_nodes_.size());
      free_nodes_.push_back(i);
    }
  }
}

SpMat DirichletSystem::reduce(const SpMat& K) const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(K.nonZeros());
  for (int col = 0; col < K.outerSize(); ++col) {
    const int cf = free_of_[col];
    if (cf < 0) continue;
    for (SpMat::InnerIterator it(K, col); it; ++it) {
      const int rf = free_of_[it.row()];
      if (rf >= 0) triplets.emplace_back(rf, cf, it.value());
    }
  }
  SpMat out(num_free(), num_free());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SpMat DirichletSystem::coupling(const SpMat& K) const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < K.outerSize(); ++col) {
    const int cc = fixed_of_[col];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(K, col); it; ++it) {
      const int rf = free_of_[it.row()];
      if (rf >= 0) triplets.emplace_back(rf, cc, it.value());
    }
  }
  SpMat out(num_free(), num_fixed());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Eigen::VectorXd DirichletSystem::restrict_free(
    const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(num_free());
  for (int i = 0; i < num_free(); ++i) out[i] = full[free_nodes_[i]];
  return out;
}

Eigen::VectorXd DirichletSystem::restrict_fixed(
    const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(num_fixed());
  for (int i = 0; i < num_fixed(); ++i) out[i] = full[fixed_nodes_[i]];
  return out;
}

Eigen::VectorXd DirichletSystem::expand(
    const Eigen::VectorXd& x_free, const Eigen::VectorXd& fixed_values) const {
  Eigen::VectorXd out(num_nodes());
  for (int i = 0; i < num_free(); ++i) out[free_nodes_[i]] = x_free[i];
  for (int i = 0; i < num_fixed(); ++i) out[fixed_nodes_[i]] = fixed_values[i];
  return out;
}

Eigen::VectorXd DirichletSystem::fixed_values_from(
    const Mesh& mesh, const std::map<std::string, double>& values) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_fixed());
  for (const auto& [marker, value] : values) {
    auto it = mesh.boundary_nodes.find(marker);
    if (it == mesh.boundary_nodes.end())
      throw std::invalid_argument("unknown boundary marker '" + marker + "'");
    for (int node : it->second) {
      const int k = fixed_of_[node];
      if (k < 0)
        throw std::invalid_argument("marker '" + marker +
                                    "' is not part of this Dirichlet system");
      out[k] = value;
    }
  }
  return out;
}

ReducedSystem apply_dirichlet(const SpMat& K, const Eigen::VectorXd& rhs,
                              const Mesh& mesh,
                              const std::map<std::string, double>& values) {
  std::vector<std::string> markers;
  for (const auto& [marker, value] : values) markers.push_back(marker);
  DirichletSystem bc(mesh, markers);
  ReducedSystem sys{std::move(bc), {}, {}, {}};
  sys.fixed_values = sys.bc.fixed_values_from(mesh, values);
  sys.K_ff = sys.bc.reduce(K);
  sys.rhs_f = sys.bc.restrict_free(rhs) - sys.bc.coupling(K) * sys.fixed_values;
  return sys;
}

}  // namespace eqsadj
