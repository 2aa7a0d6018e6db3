// Triangulations of the unit square with full element/edge connectivity
// and per-element geometry (areas, diameters, outward normals).

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mhdwg {

using Vec2 = Eigen::Vector2d;

// 2D cross product: v x w = v1*w2 - v2*w1. The curl of a 2D vector field is
// the scalar du2/dx - du1/dy; the curl of a scalar field t is (dt/dy, -dt/dx).
inline double cross2(const Vec2& v, const Vec2& w) { return v.x() * w.y() - v.y() * w.x(); }

struct Edge {
  int v0 = -1, v1 = -1;        // vertex ids, v0 < v1
  std::array<int, 2> elem{-1, -1};  // incident elements; elem[1] = -1 on the boundary
  bool boundary = false;
  Vec2 normal = Vec2::Zero();  // unit normal, from elem[0] towards elem[1] (outward on the boundary)
  Vec2 tangent = Vec2::Zero(); // unit tangent from v0 to v1
  Vec2 midpoint = Vec2::Zero();
  double length = 0.0;
};

struct ElementGeometry {
  double area = 0.0;
  double diameter = 0.0;  // h_K, the longest edge of the triangle
  Vec2 centroid = Vec2::Zero();
  std::array<Vec2, 3> vertex;
  std::array<double, 3> edge_length;    // local edge l = (v_l, v_{l+1})
  std::array<Vec2, 3> outward_normal;   // unit, per local edge
  Eigen::Matrix2d jacobian;             // affine map from the reference triangle (0,0),(1,0),(0,1)
};

class Mesh {
public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements)
      : vertices_(std::move(vertices)), elements_(std::move(elements)) {
    build_connectivity();
    build_geometry();
  }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& element(int K) const {
    check_element(K);
    return elements_[K];
  }
  const Edge& edge(int e) const { return edges_[e]; }

  // Global edge id of local edge l = (vertex l, vertex l+1) of element K.
  int element_edge(int K, int l) const {
    check_element(K);
    return elem_edges_[K][l];
  }
  // +1 if the CCW traversal of K runs the edge from its lower-indexed vertex.
  int element_edge_sign(int K, int l) const {
    check_element(K);
    return elem_edge_sign_[K][l];
  }

  const ElementGeometry& geometry(int K) const {
    check_element(K);
    return geometry_[K];
  }

  // The other element incident to local edge l of K, if any.
  std::optional<int> neighbor(int K, int l) const {
    const Edge& e = edges_[element_edge(K, l)];
    int other = (e.elem[0] == K) ? e.elem[1] : e.elem[0];
    if (other < 0) return std::nullopt;
    return other;
  }

  int num_boundary_edges() const { return num_boundary_edges_; }
  double max_diameter() const { return max_diameter_; }

  // Plain-text dump (vertex list, element list, edge list); debugging aid only.
  void dump(std::ostream& os) const {
    os << "vertices " << num_vertices() << "\n";
    for (const auto& v : vertices_) os << v.x() << " " << v.y() << "\n";
    os << "elements " << num_elements() << "\n";
    for (const auto& t : elements_) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "edges " << num_edges() << "\n";
    for (const auto& e : edges_)
      os << e.v0 << " " << e.v1 << " " << e.elem[0] << " " << e.elem[1] << " "
         << (e.boundary ? 1 : 0) << "\n";
  }

private:
  void check_element(int K) const {
    if (K < 0 || K >= num_elements()) throw std::out_of_range("Mesh: element id out of range");
  }

  void build_connectivity() {
    std::map<std::pair<int, int>, int> edge_of;
    elem_edges_.resize(elements_.size());
    elem_edge_sign_.resize(elements_.size());
    for (int K = 0; K < num_elements(); ++K) {
      for (int l = 0; l < 3; ++l) {
        int a = elements_[K][l];
        int b = elements_[K][(l + 1) % 3];
        auto key = std::minmax(a, b);
        auto it = edge_of.find(key);
        int e;
        if (it == edge_of.end()) {
          e = num_edges();
          edge_of.emplace(key, e);
          Edge ed;
          ed.v0 = key.first;
          ed.v1 = key.second;
          ed.elem[0] = K;
          edges_.push_back(ed);
        } else {
          e = it->second;
          if (edges_[e].elem[1] != -1)
            throw std::runtime_error("Mesh: edge incident to more than two elements");
          edges_[e].elem[1] = K;
        }
        elem_edges_[K][l] = e;
        elem_edge_sign_[K][l] = (a < b) ? +1 : -1;
      }
    }
    num_boundary_edges_ = 0;
    for (auto& e : edges_) {
      e.boundary = (e.elem[1] == -1);
      if (e.boundary) ++num_boundary_edges_;
      Vec2 d = vertices_[e.v1] - vertices_[e.v0];
      e.length = d.norm();
      e.tangent = d / e.length;
      e.midpoint = 0.5 * (vertices_[e.v0] + vertices_[e.v1]);
    }
  }

  void build_geometry() {
    geometry_.resize(elements_.size());
    max_diameter_ = 0.0;
    for (int K = 0; K < num_elements(); ++K) {
      ElementGeometry& g = geometry_[K];
      for (int l = 0; l < 3; ++l) g.vertex[l] = vertices_[elements_[K][l]];
      Vec2 d1 = g.vertex[1] - g.vertex[0];
      Vec2 d2 = g.vertex[2] - g.vertex[0];
      double signed_area = 0.5 * cross2(d1, d2);
      if (signed_area <= 0.0)
        throw std::runtime_error("Mesh: element vertices not counterclockwise");
      g.area = signed_area;
      g.centroid = (g.vertex[0] + g.vertex[1] + g.vertex[2]) / 3.0;
      g.jacobian.col(0) = d1;
      g.jacobian.col(1) = d2;
      g.diameter = 0.0;
      for (int l = 0; l < 3; ++l) {
        Vec2 t = g.vertex[(l + 1) % 3] - g.vertex[l];
        g.edge_length[l] = t.norm();
        g.diameter = std::max(g.diameter, g.edge_length[l]);
        // CCW traversal: rotating the edge direction by -90 degrees points outward.
        g.outward_normal[l] = Vec2(t.y(), -t.x()) / g.edge_length[l];
      }
      max_diameter_ = std::max(max_diameter_, g.diameter);
    }
    // orient global edge normals from elem[0] to elem[1] (outward on the boundary)
    for (auto& e : edges_) {
      int K = e.elem[0];
      for (int l = 0; l < 3; ++l) {
        if (elem_edges_[K][l] == static_cast<int>(&e - edges_.data())) {
          e.normal = geometry_[K].outward_normal[l];
          break;
        }
      }
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> elem_edges_;
  std::vector<std::array<int, 3>> elem_edge_sign_;
  std::vector<ElementGeometry> geometry_;
  int num_boundary_edges_ = 0;
  double max_diameter_ = 0.0;
};

// n x n squares on [0,1]^2, each split along the lower-left to upper-right
// diagonal into two triangles. 2n^2 elements, (n+1)^2 vertices.
inline Mesh build_structured_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_structured_mesh: n must be >= 1");
  std::vector<Vec2> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(double(i) / n, double(j) / n);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> elements;
  elements.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      elements.push_back({v00, v10, v11});
      elements.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), std::move(elements));
}

}  // namespace mhdwg
