#include "eqsadj/qoi.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace eqsadj {

QoiKind parse_qoi_kind(const std::string& name) {
  if (name == "energy_integral") return QoiKind::energy_integral;
  if (name == "pointwise_potential") return QoiKind::pointwise_potential;
  if (name == "pointwise_field_magnitude")
    return QoiKind::pointwise_field_magnitude;
  if (name == "synthetic_quadratic") return QoiKind::synthetic_quadratic;
  throw std::invalid_argument("unknown qoi kind '" + name + "'");
}

std::string qoi_kind_name(QoiKind k) {
  switch (k) {
    case QoiKind::energy_integral: return "energy_integral";
    case QoiKind::pointwise_potential: return "pointwise_potential";
    case QoiKind::pointwise_field_magnitude:
      return "pointwise_field_magnitude";
    case QoiKind::synthetic_quadratic: return "synthetic_quadratic";
  }
  return "?";
}

std::vector<double> window_weights(const TimeGrid& grid, double t_a,
                                   double t_b) {
  const int n = grid.size();
  std::vector<double> w(n, 0.0);
  const double tol = 1e-12 * grid.T;
  int i0 = -1, i1 = -1;
  for (int i = 0; i < n; ++i) {
    if (grid.t[i] >= t_a - tol && grid.t[i] <= t_b + tol) {
      if (i0 < 0) i0 = i;
      i1 = i;
    }
  }
  if (i0 < 0 || i1 <= i0) return w;  // empty or single-sample window
  for (int i = i0; i <= i1; ++i) {
    const double lo = i == i0 ? grid.t[i0] : grid.t[i - 1];
    const double hi = i == i1 ? grid.t[i1] : grid.t[i + 1];
    w[i] = 0.5 * (hi - lo);
  }
  return w;
}

namespace {

bool in_regions(const QoiSpec& spec, int region) {
  return spec.regions.empty() ||
         std::find(spec.regions.begin(), spec.regions.end(), region) !=
             spec.regions.end();
}

// Joule density integral over the QoI's region set at one sample.
double energy_density(const QoiSpec& spec, const Mesh& mesh,
                      const MaterialMap& materials,
                      const std::vector<ElementGeometry>& geom,
                      const Eigen::VectorXd& u) {
  double g = 0.0;
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    if (!in_regions(spec, mesh.triangles[e].region)) continue;
    const MaterialModel& m = material_for(materials, mesh.triangles[e].region);
    const Eigen::Vector2d grad = element_gradient(mesh, geom, u, e);
    const double E = grad.norm();
    g += conductivity(E, m) * grad.squaredNorm() * geom[e].weight;
  }
  return g;
}

struct PointProbe {
  int element;
  std::array<int, 3> nodes;
  Eigen::Vector3d bary;
};

PointProbe resolve_probe(const QoiSpec& spec, const Mesh& mesh) {
  const int e = find_element(mesh, spec.point);
  if (e < 0)
    throw std::invalid_argument("qoi '" + spec.name +
                                "': probe point lies outside the mesh");
  const Triangle& tri = mesh.triangles[e];
  const Eigen::Vector2d& a = mesh.nodes[tri.v[0]];
  const Eigen::Vector2d& b = mesh.nodes[tri.v[1]];
  const Eigen::Vector2d& c = mesh.nodes[tri.v[2]];
  const double area2 = 2.0 * signed_area(mesh, tri);
  const Eigen::Vector2d p = spec.point;
  Eigen::Vector3d bary;
  bary[0] = ((b.x() - p.x()) * (c.y() - p.y()) -
             (c.x() - p.x()) * (b.y() - p.y())) /
            area2;
  bary[1] = ((c.x() - p.x()) * (a.y() - p.y()) -
             (a.x() - p.x()) * (c.y() - p.y())) /
            area2;
  bary[2] = 1.0 - bary[0] - bary[1];
  return {e, tri.v, bary};
}

}  // namespace

double eval_qoi(const QoiSpec& spec, const Mesh& mesh,
                const MaterialMap& materials,
                const std::vector<ElementGeometry>& geom,
                const TransientSolution& solution) {
  const TimeGrid& grid = solution.grid;
  switch (spec.kind) {
    case QoiKind::energy_integral: {
      const std::vector<double> w = window_weights(grid, spec.t_a, spec.t_b);
      double G = 0.0;
      for (int n = 0; n < grid.size(); ++n) {
        if (w[n] == 0.0) continue;
        G += w[n] * energy_density(spec, mesh, materials, geom, solution.at(n));
      }
      return G;
    }
    case QoiKind::pointwise_potential: {
      const int n_ref = grid.index_of(spec.t_ref);
      const PointProbe probe = resolve_probe(spec, mesh);
      const Eigen::VectorXd u = solution.at(n_ref);
      double phi = 0.0;
      for (int r = 0; r < 3; ++r) phi += probe.bary[r] * u[probe.nodes[r]];
      return phi;
    }
    case QoiKind::pointwise_field_magnitude: {
      const int n_ref = grid.index_of(spec.t_ref);
      const PointProbe probe = resolve_probe(spec, mesh);
      const Eigen::VectorXd u = solution.at(n_ref);
      return element_gradient(mesh, geom, u, probe.element).norm();
    }
    case QoiKind::synthetic_quadratic:
      throw std::invalid_argument(
          "synthetic_quadratic is evaluated from the parameter value, not the "
          "solution");
  }
  return 0.0;
}

double eval_qoi(const QoiSpec& spec, const Mesh& mesh,
                const MaterialMap& materials,
                const TransientSolution& solution) {
  return eval_qoi(spec, mesh, materials, element_geometry(mesh), solution);
}

double eval_qoi_synthetic(const QoiSpec& spec, double param_value) {
  if (spec.kind != QoiKind::synthetic_quadratic)
    throw std::invalid_argument("eval_qoi_synthetic: wrong kind");
  return param_value * param_value;
}

std::vector<double> qoi_trace(const QoiSpec& spec, const Mesh& mesh,
                              const MaterialMap& materials,
                              const std::vector<ElementGeometry>& geom,
                              const TransientSolution& solution) {
  const TimeGrid& grid = solution.grid;
  std::vector<double> trace(grid.size(), 0.0);
  switch (spec.kind) {
    case QoiKind::energy_integral:
      for (int n = 0; n < grid.size(); ++n)
        trace[n] = energy_density(spec, mesh, materials, geom, solution.at(n));
      break;
    case QoiKind::pointwise_potential: {
      const PointProbe probe = resolve_probe(spec, mesh);
      for (int n = 0; n < grid.size(); ++n) {
        const Eigen::VectorXd u = solution.at(n);
        double phi = 0.0;
        for (int r = 0; r < 3; ++r) phi += probe.bary[r] * u[probe.nodes[r]];
        trace[n] = phi;
      }
      break;
    }
    case QoiKind::pointwise_field_magnitude: {
      const PointProbe probe = resolve_probe(spec, mesh);
      for (int n = 0; n < grid.size(); ++n)
        trace[n] =
            element_gradient(mesh, geom, solution.at(n), probe.element).norm();
      break;
    }
    case QoiKind::synthetic_quadratic:
      throw std::invalid_argument("synthetic_quadratic has no time trace");
  }
  return trace;
}

AdjointRhs adjoint_rhs(const QoiSpec& spec, const Mesh& mesh,
                       const MaterialMap& materials,
                       const std::vector<ElementGeometry>& geom,
                       const TransientSolution& solution,
                       const std::vector<std::string>& dirichlet_markers) {
  const TimeGrid& grid = solution.grid;
  const int n_nodes = mesh.num_nodes();
  AdjointRhs q(grid.size(), Eigen::VectorXd::Zero(n_nodes));
  const std::vector<double> tw = grid.trapezoid_weights();

  std::set<int> dirichlet;
  for (const std::string& marker : dirichlet_markers) {
    auto it = mesh.boundary_nodes.find(marker);
    if (it == mesh.boundary_nodes.end())
      throw std::invalid_argument("unknown boundary marker '" + marker + "'");
    dirichlet.insert(it->second.begin(), it->second.end());
  }

  switch (spec.kind) {
    case QoiKind::energy_integral: {
      const std::vector<double> w = window_weights(grid, spec.t_a, spec.t_b);
      for (int n = 0; n < grid.size(); ++n) {
        if (w[n] == 0.0) continue;
        const Eigen::VectorXd u = solution.at(n);
        Eigen::VectorXd dgdu = Eigen::VectorXd::Zero(n_nodes);
        for (int e = 0; e < mesh.num_triangles(); ++e) {
          if (!in_regions(spec, mesh.triangles[e].region)) continue;
          const MaterialModel& m =
              material_for(materials, mesh.triangles[e].region);
          const Eigen::Vector2d grad = element_gradient(mesh, geom, u, e);
          const double E = grad.norm();
          // d/du_r of sigma(|E|) |grad phi|^2, chain term included:
          // (2 sigma + sigma'(E) E) (grad phi . grad N_r) weight.
          const double factor =
              (2.0 * conductivity(E, m) + conductivity_dE(E, m) * E) *
              geom[e].weight;
          for (int r = 0; r < 3; ++r)
            dgdu[mesh.triangles[e].v[r]] +=
                factor * grad.dot(geom[e].grad.col(r));
        }
        q[n] = (w[n] / tw[n]) * dgdu;
      }
      break;
    }
    case QoiKind::pointwise_potential: {
      const int n_ref = grid.index_of(spec.t_ref);
      const PointProbe probe = resolve_probe(spec, mesh);
      // Same interpolation weights as the evaluation; a probe sitting on a
      // Dirichlet node has a pinned value and no meaningful adjoint source.
      for (int r = 0; r < 3; ++r)
        if (dirichlet.count(probe.nodes[r]) && probe.bary[r] > 1.0 - 1e-9)
          throw std::invalid_argument("qoi '" + spec.name +
                                      "': probe point lies on a Dirichlet "
                                      "boundary; the adjoint forces w = 0 "
                                      "there");
      for (int r = 0; r < 3; ++r)
        q[n_ref][probe.nodes[r]] += probe.bary[r] / tw[n_ref];
      break;
    }
    case QoiKind::pointwise_field_magnitude: {
      const int n_ref = grid.index_of(spec.t_ref);
      const PointProbe probe = resolve_probe(spec, mesh);
      int free_nodes = 0;
      for (int r = 0; r < 3; ++r)
        if (!dirichlet.count(probe.nodes[r])) ++free_nodes;
      if (free_nodes == 0)
        throw std::invalid_argument("qoi '" + spec.name +
                                    "': probe element is entirely on a "
                                    "Dirichlet boundary");
      const Eigen::VectorXd u = solution.at(n_ref);
      const Eigen::Vector2d grad =
          element_gradient(mesh, geom, u, probe.element);
      const double mag = grad.norm();
      if (mag < E_floor)
        throw std::invalid_argument("qoi '" + spec.name +
                                    "': |E| vanishes on the probe element; "
                                    "the magnitude is not differentiable");
      // d|grad phi|/du_r = (grad phi . grad N_r)/|grad phi|, hat-scaled.
      for (int r = 0; r < 3; ++r)
        q[n_ref][probe.nodes[r]] =
            grad.dot(geom[probe.element].grad.col(r)) / (mag * tw[n_ref]);
      break;
    }
    case QoiKind::synthetic_quadratic:
      break;  // no field dependence; q stays zero
  }
  return q;
}

}  // namespace eqsadj
