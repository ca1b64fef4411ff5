#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqsadj {

enum class Symmetry { cartesian, axisymmetric };

struct Triangle {
  std::array<int, 3> v{0, 0, 0};
  int region = 0;
};

// Conforming triangular mesh. In axisymmetric mode coordinates are (rho, z)
// with rho >= 0; in cartesian mode (x, y). Boundary markers map names to
// sorted node-index lists.
struct Mesh {
  Symmetry symmetry = Symmetry::cartesian;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<Triangle> triangles;
  std::map<std::string, std::vector<int>> boundary_nodes;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
};

// Error with the offending line number for text-format problems.
struct MeshParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double signed_area(const Mesh& mesh, const Triangle& tri);
double domain_area(const Mesh& mesh);

// Flip triangles with negative signed area so all are counter-clockwise.
void normalize_orientation(Mesh& mesh);

// Check all type invariants (indices, orientation, radii, duplicate
// triangles, boundary markers on the actual boundary); throws
// std::invalid_argument on violation.
void validate_mesh(const Mesh& mesh);

// Two stacked material layers of equal thickness `layer_thickness` on
// [0,width] x [0,2*layer_thickness]; region 1 above the interface, region 2
// below; markers "top_electrode" / "bottom_electrode".
Mesh build_layered_rect(double width, double layer_thickness, int nx,
                        int ny_per_layer);

// Structured tensor-product mesh over bands of x/y breakpoints. Cell counts
// are per band; the region of each cell is chosen from its center point.
Mesh build_structured_rect(const std::vector<double>& x_breaks,
                           const std::vector<int>& nx_per_band,
                           const std::vector<double>& y_breaks,
                           const std::vector<int>& ny_per_band,
                           const std::function<int(double, double)>& region_of,
                           Symmetry symmetry);

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

// Index of the node closest to `point`; ties broken by lowest index.
int nearest_node(const Mesh& mesh, const Eigen::Vector2d& point);

// Index of a triangle containing `point` (barycentric test with tolerance),
// or -1 when the point lies outside the mesh.
int find_element(const Mesh& mesh, const Eigen::Vector2d& point);

}  // namespace eqsadj
