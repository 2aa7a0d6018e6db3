// Weak Galerkin fields: per-element interior polynomial coefficients plus
// single-valued per-edge trace coefficients (the {v_o, v_b} pairs).

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mhdwg/mesh.hpp"
#include "mhdwg/polybasis.hpp"

namespace mhdwg {

class WGScalarField {
public:
  WGScalarField() = default;
  WGScalarField(const Mesh& mesh, int interior_degree, int trace_degree)
      : mesh_(&mesh), deg_o_(interior_degree), deg_b_(trace_degree) {
    elem_.assign(mesh.num_elements(), Eigen::VectorXd::Zero(tri_space_dim(deg_o_)));
    edge_.assign(mesh.num_edges(), Eigen::VectorXd::Zero(edge_space_dim(deg_b_)));
  }

  const Mesh& mesh() const { return *mesh_; }
  int interior_degree() const { return deg_o_; }
  int trace_degree() const { return deg_b_; }

  Eigen::VectorXd& interior(int K) { return elem_[K]; }
  const Eigen::VectorXd& interior(int K) const { return elem_[K]; }
  Eigen::VectorXd& trace(int e) { return edge_[e]; }
  const Eigen::VectorXd& trace(int e) const { return edge_[e]; }

  double eval_interior(int K, const Vec2& p) const {
    TriBasis b(mesh_->geometry(K), deg_o_);
    double v = 0;
    for (int i = 0; i < b.dim(); ++i) v += elem_[K][i] * b.value(i, p);
    return v;
  }

  double eval_trace(int e, const Vec2& p) const {
    EdgeBasis b(mesh_->edge(e), deg_b_);
    double v = 0;
    for (int j = 0; j < b.dim(); ++j) v += edge_[e][j] * b.value(j, p);
    return v;
  }

  // Local dof vector of element K: [interior | edge0 | edge1 | edge2].
  Eigen::VectorXd local_dofs(int K) const {
    int no = tri_space_dim(deg_o_), nb = edge_space_dim(deg_b_);
    Eigen::VectorXd x(no + 3 * nb);
    x.head(no) = elem_[K];
    for (int l = 0; l < 3; ++l) x.segment(no + l * nb, nb) = edge_[mesh_->element_edge(K, l)];
    return x;
  }

  WGScalarField& operator+=(const WGScalarField& o) {
    for (std::size_t i = 0; i < elem_.size(); ++i) elem_[i] += o.elem_[i];
    for (std::size_t i = 0; i < edge_.size(); ++i) edge_[i] += o.edge_[i];
    return *this;
  }
  WGScalarField& operator*=(double a) {
    for (auto& c : elem_) c *= a;
    for (auto& c : edge_) c *= a;
    return *this;
  }

private:
  const Mesh* mesh_ = nullptr;
  int deg_o_ = 0, deg_b_ = 0;
  std::vector<Eigen::VectorXd> elem_;
  std::vector<Eigen::VectorXd> edge_;
};

class WGVectorField {
public:
  WGVectorField() = default;
  WGVectorField(const Mesh& mesh, int interior_degree, int trace_degree)
      : comp_{WGScalarField(mesh, interior_degree, trace_degree),
              WGScalarField(mesh, interior_degree, trace_degree)} {}

  const Mesh& mesh() const { return comp_[0].mesh(); }
  int interior_degree() const { return comp_[0].interior_degree(); }
  int trace_degree() const { return comp_[0].trace_degree(); }

  WGScalarField& component(int c) { return comp_[c]; }
  const WGScalarField& component(int c) const { return comp_[c]; }

  Vec2 eval_interior(int K, const Vec2& p) const {
    return {comp_[0].eval_interior(K, p), comp_[1].eval_interior(K, p)};
  }
  Vec2 eval_trace(int e, const Vec2& p) const {
    return {comp_[0].eval_trace(e, p), comp_[1].eval_trace(e, p)};
  }

  // Vector local layout: [int_x, int_y | e0_x, e0_y | e1_x, e1_y | e2_x, e2_y].
  Eigen::VectorXd local_dofs(int K) const {
    int no = tri_space_dim(interior_degree());
    int nb = edge_space_dim(trace_degree());
    Eigen::VectorXd x(2 * no + 6 * nb);
    for (int c = 0; c < 2; ++c) {
      x.segment(c * no, no) = comp_[c].interior(K);
      for (int l = 0; l < 3; ++l)
        x.segment(2 * no + l * 2 * nb + c * nb, nb) =
            comp_[c].trace(mesh().element_edge(K, l));
    }
    return x;
  }

  WGVectorField& operator+=(const WGVectorField& o) {
    comp_[0] += o.comp_[0];
    comp_[1] += o.comp_[1];
    return *this;
  }
  WGVectorField& operator*=(double a) {
    comp_[0] *= a;
    comp_[1] *= a;
    return *this;
  }

private:
  WGScalarField comp_[2];
};

// L2 norm of the interior part, sqrt(sum_K c^T M_K c) computed by quadrature.
inline double interior_l2_norm(const WGScalarField& f) {
  const Mesh& mesh = f.mesh();
  QuadratureRule ref = triangle_quadrature(2 * f.interior_degree());
  double s = 0;
  for (int K = 0; K < mesh.num_elements(); ++K) {
    QuadratureRule rule = for_element(ref, mesh.geometry(K));
    TriBasis b(mesh.geometry(K), f.interior_degree());
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      double v = 0;
      for (int i = 0; i < b.dim(); ++i) v += f.interior(K)[i] * b.value(i, rule.points[q]);
      s += rule.weights[q] * v * v;
    }
  }
  return std::sqrt(s);
}

inline double interior_l2_norm(const WGVectorField& f) {
  double a = interior_l2_norm(f.component(0));
  double b = interior_l2_norm(f.component(1));
  return std::sqrt(a * a + b * b);
}

}  // namespace mhdwg
