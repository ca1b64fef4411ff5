#pragma once

#include <string>
#include <vector>

#include "eqsadj/assembly.hpp"
#include "eqsadj/forward.hpp"

namespace eqsadj {

enum class QoiKind {
  energy_integral,           // integral over [t_a,t_b] of sigma |grad phi|^2
  pointwise_potential,       // phi(point, t_ref)
  pointwise_field_magnitude, // |E| on the element containing point, at t_ref
  synthetic_quadratic        // G(p) = p^2, bypasses the PDE (oracle fixture)
};

QoiKind parse_qoi_kind(const std::string& name);
std::string qoi_kind_name(QoiKind k);

struct QoiSpec {
  std::string name;
  QoiKind kind = QoiKind::energy_integral;
  std::vector<int> regions;  // energy kind; empty means all regions
  double t_a = 0.0, t_b = 0.0;
  Eigen::Vector2d point{0.0, 0.0};
  double t_ref = 0.0;
  std::string parameter;  // synthetic_quadratic: parameter name
};

// dG/du(t_n) scaled by 1/(trapezoid weight of t_n): the vectors q(t_n) that
// drive the adjoint solve. For pointwise kinds this realizes the unit-area
// hat at t_ref (value 1/dt_imp on the refined sample, zero elsewhere).
using AdjointRhs = std::vector<Eigen::VectorXd>;

// Trapezoid weights of the sub-grid restricted to [t_a, t_b]; zero outside.
std::vector<double> window_weights(const TimeGrid& grid, double t_a,
                                   double t_b);

double eval_qoi(const QoiSpec& spec, const Mesh& mesh,
                const MaterialMap& materials,
                const std::vector<ElementGeometry>& geom,
                const TransientSolution& solution);
double eval_qoi(const QoiSpec& spec, const Mesh& mesh,
                const MaterialMap& materials,
                const TransientSolution& solution);
// synthetic_quadratic only.
double eval_qoi_synthetic(const QoiSpec& spec, double param_value);

// Per-sample history: the probed value for pointwise kinds, the
// instantaneous dissipated power over the QoI regions for energy_integral.
std::vector<double> qoi_trace(const QoiSpec& spec, const Mesh& mesh,
                              const MaterialMap& materials,
                              const std::vector<ElementGeometry>& geom,
                              const TransientSolution& solution);

AdjointRhs adjoint_rhs(const QoiSpec& spec, const Mesh& mesh,
                       const MaterialMap& materials,
                       const std::vector<ElementGeometry>& geom,
                       const TransientSolution& solution,
                       const std::vector<std::string>& dirichlet_markers);

}  // namespace eqsadj
