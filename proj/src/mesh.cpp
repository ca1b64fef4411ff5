#include "eqsadj/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace eqsadj {

double signed_area(const Mesh& mesh, const Triangle& tri) {
  const Eigen::Vector2d& a = mesh.nodes[tri.v[0]];
  const Eigen::Vector2d& b = mesh.nodes[tri.v[1]];
  const Eigen::Vector2d& c = mesh.nodes[tri.v[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

double domain_area(const Mesh& mesh) {
  double area = 0.0;
  for (const Triangle& tri : mesh.triangles) area += signed_area(mesh, tri);
  return area;
}

void normalize_orientation(Mesh& mesh) {
  for (Triangle& tri : mesh.triangles) {
    if (signed_area(mesh, tri) < 0.0) std::swap(tri.v[1], tri.v[2]);
  }
}

namespace {

// Nodes on the domain boundary: endpoints of edges used by exactly one
// triangle.
std::set<int> boundary_node_set(const Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const Triangle& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int i = tri.v[k], j = tri.v[(k + 1) % 3];
      edge_count[{std::min(i, j), std::max(i, j)}]++;
    }
  }
  std::set<int> out;
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      out.insert(edge.first);
      out.insert(edge.second);
    }
  }
  return out;
}

}  // namespace

void validate_mesh(const Mesh& mesh) {
  const int n = mesh.num_nodes();
  if (n == 0 || mesh.triangles.empty())
    throw std::invalid_argument("mesh: empty");
  std::set<std::array<int, 3>> seen;
  for (const Triangle& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k)
      if (tri.v[k] < 0 || tri.v[k] >= n)
        throw std::invalid_argument("mesh: triangle node index out of range");
    std::array<int, 3> key = tri.v;
    std::sort(key.begin(), key.end());
    if (key[0] == key[1] || key[1] == key[2])
      throw std::invalid_argument("mesh: degenerate triangle");
    if (!seen.insert(key).second)
      throw std::invalid_argument("mesh: duplicate triangle");
    if (signed_area(mesh, tri) <= 0.0)
      throw std::invalid_argument("mesh: triangle not counter-clockwise");
  }
  if (mesh.symmetry == Symmetry::axisymmetric) {
    for (const Eigen::Vector2d& p : mesh.nodes)
      if (p.x() < 0.0)
        throw std::invalid_argument("mesh: negative radius in axisymmetric mode");
  }
  const std::set<int> boundary = boundary_node_set(mesh);
  for (const auto& [marker, nodes] : mesh.boundary_nodes) {
    for (int i : nodes) {
      if (i < 0 || i >= n)
        throw std::invalid_argument("mesh: boundary node index out of range");
      if (!boundary.count(i))
        throw std::invalid_argument("mesh: marker '" + marker +
                                    "' references an interior node");
    }
  }
}

Mesh build_layered_rect(double width, double layer_thickness, int nx,
                        int ny_per_layer) {
  if (width <= 0.0 || layer_thickness <= 0.0)
    throw std::invalid_argument("build_layered_rect: dimensions must be positive");
  if (nx < 1 || ny_per_layer < 1)
    throw std::invalid_argument("build_layered_rect: counts must be >= 1");
  const double d = layer_thickness;
  // Region 2 below the interface y = d, region 1 above.
  auto region_of = [d](double /*x*/, double y) { return y < d ? 2 : 1; };
  Mesh mesh = build_structured_rect({0.0, width}, {nx}, {0.0, d, 2.0 * d},
                                    {ny_per_layer, ny_per_layer}, region_of,
                                    Symmetry::cartesian);
  const int ny = 2 * ny_per_layer;
  std::vector<int> bottom, top;
  for (int i = 0; i <= nx; ++i) {
    bottom.push_back(i);
    top.push_back(ny * (nx + 1) + i);
  }
  mesh.boundary_nodes["bottom_electrode"] = bottom;
  mesh.boundary_nodes["top_electrode"] = top;
  return mesh;
}

Mesh build_structured_rect(const std::vector<double>& x_breaks,
                           const std::vector<int>& nx_per_band,
                           const std::vector<double>& y_breaks,
                           const std::vector<int>& ny_per_band,
                           const std::function<int(double, double)>& region_of,
                           Symmetry symmetry) {
  if (x_breaks.size() < 2 || y_breaks.size() < 2 ||
      nx_per_band.size() != x_breaks.size() - 1 ||
      ny_per_band.size() != y_breaks.size() - 1)
    throw std::invalid_argument("build_structured_rect: inconsistent bands");
  std::vector<double> xs, ys;
  for (size_t b = 0; b + 1 < x_breaks.size(); ++b) {
    if (x_breaks[b + 1] <= x_breaks[b] || nx_per_band[b] < 1)
      throw std::invalid_argument("build_structured_rect: bad x band");
    for (int i = 0; i < nx_per_band[b]; ++i)
      xs.push_back(x_breaks[b] +
                   (x_breaks[b + 1] - x_breaks[b]) * i / nx_per_band[b]);
  }
  xs.push_back(x_breaks.back());
  for (size_t b = 0; b + 1 < y_breaks.size(); ++b) {
    if (y_breaks[b + 1] <= y_breaks[b] || ny_per_band[b] < 1)
      throw std::invalid_argument("build_structured_rect: bad y band");
    for (int j = 0; j < ny_per_band[b]; ++j)
      ys.push_back(y_breaks[b] +
                   (y_breaks[b + 1] - y_breaks[b]) * j / ny_per_band[b]);
  }
  ys.push_back(y_breaks.back());

  Mesh mesh;
  mesh.symmetry = symmetry;
  const int ncol = static_cast<int>(xs.size());
  const int nrow = static_cast<int>(ys.size());
  mesh.nodes.reserve(static_cast<size_t>(ncol) * nrow);
  for (int j = 0; j < nrow; ++j)
    for (int i = 0; i < ncol; ++i)
      mesh.nodes.emplace_back(xs[i], ys[j]);
  auto node_id = [ncol](int i, int j) { return j * ncol + i; };
  for (int j = 0; j + 1 < nrow; ++j) {
    for (int i = 0; i + 1 < ncol; ++i) {
      const double xc = 0.5 * (xs[i] + xs[i + 1]);
      const double yc = 0.5 * (ys[j] + ys[j + 1]);
      const int region = region_of(xc, yc);
      const int n00 = node_id(i, j), n10 = node_id(i + 1, j);
      const int n01 = node_id(i, j + 1), n11 = node_id(i + 1, j + 1);
      mesh.triangles.push_back({{n00, n10, n11}, region});
      mesh.triangles.push_back({{n00, n11, n01}, region});
    }
  }
  normalize_orientation(mesh);
  return mesh;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  throw MeshParseError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshParseError(path + ": cannot open file");
  Mesh mesh;
  int lineno = 0;
  auto next_line = [&](std::string& out) -> bool {
    while (std::getline(in, out)) {
      ++lineno;
      const size_t hash = out.find('#');
      if (hash != std::string::npos) out.erase(hash);
      bool blank = out.find_first_not_of(" \t\r\n") == std::string::npos;
      if (!blank) return true;
    }
    return false;
  };
  std::string line, word;

  if (!next_line(line)) parse_fail(path, lineno, "missing symmetry line");
  {
    std::istringstream ss(line);
    std::string key, value;
    if (!(ss >> key >> value) || key != "symmetry")
      parse_fail(path, lineno, "expected 'symmetry cartesian|axisymmetric'");
    if (value == "cartesian")
      mesh.symmetry = Symmetry::cartesian;
    else if (value == "axisymmetric")
      mesh.symmetry = Symmetry::axisymmetric;
    else
      parse_fail(path, lineno, "unknown symmetry '" + value + "'");
  }

  if (!next_line(line)) parse_fail(path, lineno, "missing nodes header");
  int n_nodes = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> word >> n_nodes) || word != "nodes" || n_nodes < 1)
      parse_fail(path, lineno, "expected 'nodes N'");
  }
  mesh.nodes.reserve(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    if (!next_line(line)) parse_fail(path, lineno, "unexpected end of node list");
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y)) parse_fail(path, lineno, "malformed node line");
    if (mesh.symmetry == Symmetry::axisymmetric && x < 0.0)
      parse_fail(path, lineno, "negative radius in axisymmetric mode");
    mesh.nodes.emplace_back(x, y);
  }

  if (!next_line(line)) parse_fail(path, lineno, "missing triangles header");
  int n_tri = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> word >> n_tri) || word != "triangles" || n_tri < 1)
      parse_fail(path, lineno, "expected 'triangles M'");
  }
  mesh.triangles.reserve(n_tri);
  for (int m = 0; m < n_tri; ++m) {
    if (!next_line(line))
      parse_fail(path, lineno, "unexpected end of triangle list");
    std::istringstream ss(line);
    Triangle tri;
    if (!(ss >> tri.v[0] >> tri.v[1] >> tri.v[2] >> tri.region))
      parse_fail(path, lineno, "malformed triangle line");
    for (int k = 0; k < 3; ++k)
      if (tri.v[k] < 0 || tri.v[k] >= n_nodes)
        parse_fail(path, lineno, "node index out of range");
    mesh.triangles.push_back(tri);
  }

  while (next_line(line)) {
    std::istringstream ss(line);
    std::string marker;
    int count = 0;
    if (!(ss >> word >> marker >> count) || word != "boundary" || count < 1)
      parse_fail(path, lineno, "expected 'boundary <marker> K'");
    std::vector<int> nodes;
    nodes.reserve(count);
    while (static_cast<int>(nodes.size()) < count) {
      if (!next_line(line))
        parse_fail(path, lineno, "unexpected end of boundary block");
      std::istringstream ns(line);
      int idx;
      while (ns >> idx) {
        if (idx < 0 || idx >= n_nodes)
          parse_fail(path, lineno, "boundary node index out of range");
        nodes.push_back(idx);
      }
    }
    if (static_cast<int>(nodes.size()) != count)
      parse_fail(path, lineno, "boundary block has extra indices");
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    mesh.boundary_nodes[marker] = nodes;
  }

  normalize_orientation(mesh);
  validate_mesh(mesh);
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
  char buf[80];
  out << "symmetry "
      << (mesh.symmetry == Symmetry::cartesian ? "cartesian" : "axisymmetric")
      << "\n";
  out << "nodes " << mesh.num_nodes() << "\n";
  for (const Eigen::Vector2d& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
    out << buf;
  }
  out << "triangles " << mesh.num_triangles() << "\n";
  for (const Triangle& tri : mesh.triangles)
    out << tri.v[0] << " " << tri.v[1] << " " << tri.v[2] << " " << tri.region
        << "\n";
  for (const auto& [marker, nodes] : mesh.boundary_nodes) {
    if (nodes.empty()) continue;
    out << "boundary " << marker << " " << nodes.size() << "\n";
    for (size_t i = 0; i < nodes.size(); ++i)
      out << nodes[i] << (i + 1 == nodes.size() ? "\n" : " ");
  }
}

int nearest_node(const Mesh& mesh, const Eigen::Vector2d& point) {
  if (mesh.nodes.empty()) throw std::invalid_argument("nearest_node: empty mesh");
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const double d2 = (mesh.nodes[i] - point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

int find_element(const Mesh& mesh, const Eigen::Vector2d& point) {
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const Triangle& tri = mesh.triangles[e];
    const Eigen::Vector2d& a = mesh.nodes[tri.v[0]];
    const Eigen::Vector2d& b = mesh.nodes[tri.v[1]];
    const Eigen::Vector2d& c = mesh.nodes[tri.v[2]];
    const double area2 = 2.0 * signed_area(mesh, tri);
    const double l0 = ((b.x() - point.x()) * (c.y() - point.y()) -
                       (c.x() - point.x()) * (b.y() - point.y())) /
                      area2;
    const double l1 = ((c.x() - point.x()) * (a.y() - point.y()) -
                       (a.x() - point.x()) * (c.y() - point.y())) /
                      area2;
    const double l2 = 1.0 - l0 - l1;
    const double tol = -1e-12;
    if (l0 >= tol && l1 >= tol && l2 >= tol) return e;
  }
  return -1;
}

}  // namespace eqsadj
