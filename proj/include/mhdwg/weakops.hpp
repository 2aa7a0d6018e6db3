// Discrete weak gradient, weak divergence and weak curl as element-local
// linear operators (local WG dofs -> coefficients of the projected
// polynomial), plus L2 projections and the local Raviart-Thomas projection.
//
// Local dof layouts:
//   scalar: [interior (dim P_{deg_o}) | edge0 (deg_b+1) | edge1 | edge2]
//   vector: [int_x, int_y | e0_x, e0_y | e1_x, e1_y | e2_x, e2_y]

#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mhdwg/fields.hpp"
#include "mhdwg/mesh.hpp"
#include "mhdwg/polybasis.hpp"
#include "mhdwg/quadrature.hpp"

namespace mhdwg {

struct LocalWeakOperator {
  Eigen::MatrixXd matrix;  // (target coefficients) x (local dofs)
  int target_degree = 0;

  Eigen::VectorXd apply(const Eigen::VectorXd& local) const { return matrix * local; }
};

namespace detail {

struct ElementScratch {
  const Mesh* mesh;
  int K;
  ElementGeometry g;
  std::array<int, 3> edge_id;

  ElementScratch(const Mesh& m, int Kk) : mesh(&m), K(Kk), g(m.geometry(Kk)) {
    for (int l = 0; l < 3; ++l) edge_id[l] = m.element_edge(Kk, l);
  }
};

}  // namespace detail

// Weak gradient of a scalar WG pair {v_o, v_b} into [P_m]^2:
//   (grad_w v, phi)_K = -(v_o, div phi)_K + <v_b, phi . n>_dK.
// Output coefficients stacked [x-coeffs; y-coeffs].
inline LocalWeakOperator weak_gradient_operator(const Mesh& mesh, int K, int deg_o, int deg_b,
                                                int m) {
  detail::ElementScratch s(mesh, K);
  TriBasis bo(s.g, deg_o), bm(s.g, m);
  int no = bo.dim(), nm = bm.dim(), nb = deg_b + 1;
  int nloc = no + 3 * nb;

  QuadratureRule tri = for_element(triangle_quadrature(std::max(deg_o + m, 2 * m)), s.g);
  MassMatrix M = mass_matrix(bm, tri);

  Eigen::MatrixXd Rx = Eigen::MatrixXd::Zero(nm, nloc);
  Eigen::MatrixXd Ry = Eigen::MatrixXd::Zero(nm, nloc);

  // -(v_o, div(e_c m_i)) = -(v_o, d_c m_i)
  Eigen::MatrixXd Vo = basis_values(bo, tri.points);
  auto [Gx, Gy] = basis_gradients(bm, tri.points);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(tri.weights.data(), tri.weights.size());
  Rx.block(0, 0, nm, no) = -(Gx * w.asDiagonal() * Vo.transpose());
  Ry.block(0, 0, nm, no) = -(Gy * w.asDiagonal() * Vo.transpose());

  EdgeRule eref = edge_quadrature(deg_b + m);
  for (int l = 0; l < 3; ++l) {
    const Edge& e = mesh.edge(s.edge_id[l]);
    QuadratureRule er = for_edge(eref, e, mesh);
    EdgeBasis eb(e, deg_b);
    Eigen::MatrixXd Vb = basis_values(eb, er.points);
    Eigen::MatrixXd Vm = basis_values(bm, er.points);
    Eigen::VectorXd ew = Eigen::Map<const Eigen::VectorXd>(er.weights.data(), er.weights.size());
    Eigen::MatrixXd T = Vm * ew.asDiagonal() * Vb.transpose();
    const Vec2 n = s.g.outward_normal[l];
    Rx.block(0, no + l * nb, nm, nb) += n.x() * T;
    Ry.block(0, no + l * nb, nm, nb) += n.y() * T;
  }

  LocalWeakOperator op;
  op.target_degree = m;
  op.matrix.resize(2 * nm, nloc);
  op.matrix.topRows(nm) = M.solve(Rx);
  op.matrix.bottomRows(nm) = M.solve(Ry);
  return op;
}

// Weak divergence of a vector WG pair into P_m:
//   (div_w w, phi)_K = -(w_o, grad phi)_K + <w_b . n, phi>_dK.
inline LocalWeakOperator weak_divergence_operator(const Mesh& mesh, int K, int deg_o, int deg_b,
                                                  int m) {
  detail::ElementScratch s(mesh, K);
  TriBasis bo(s.g, deg_o), bm(s.g, m);
  int no = bo.dim(), nm = bm.dim(), nb = deg_b + 1;
  int nloc = 2 * no + 6 * nb;

  QuadratureRule tri = for_element(triangle_quadrature(std::max(deg_o + m, 2 * m)), s.g);
  MassMatrix M = mass_matrix(bm, tri);

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(nm, nloc);
  Eigen::MatrixXd Vo = basis_values(bo, tri.points);
  auto [Gx, Gy] = basis_gradients(bm, tri.points);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(tri.weights.data(), tri.weights.size());
  R.block(0, 0, nm, no) = -(Gx * w.asDiagonal() * Vo.transpose());
  R.block(0, no, nm, no) = -(Gy * w.asDiagonal() * Vo.transpose());

  EdgeRule eref = edge_quadrature(deg_b + m);
  for (int l = 0; l < 3; ++l) {
    const Edge& e = mesh.edge(s.edge_id[l]);
    QuadratureRule er = for_edge(eref, e, mesh);
    EdgeBasis eb(e, deg_b);
    Eigen::MatrixXd Vb = basis_values(eb, er.points);
    Eigen::MatrixXd Vm = basis_values(bm, er.points);
    Eigen::VectorXd ew = Eigen::Map<const Eigen::VectorXd>(er.weights.data(), er.weights.size());
    Eigen::MatrixXd T = Vm * ew.asDiagonal() * Vb.transpose();
    const Vec2 n = s.g.outward_normal[l];
    R.block(0, 2 * no + l * 2 * nb, nm, nb) += n.x() * T;
    R.block(0, 2 * no + l * 2 * nb + nb, nm, nb) += n.y() * T;
  }

  LocalWeakOperator op;
  op.target_degree = m;
  op.matrix = M.solve(R);
  return op;
}

// Weak curl (scalar in 2D) of a vector WG pair into P_m:
//   (curl_w w, phi)_K = (w_o, curl phi)_K + <n x w_b, phi>_dK,
// with curl phi = (d_y phi, -d_x phi) and n x w = n_x w_y - n_y w_x. The edge
// term carries the orientation that reproduces the classical curl on
// conforming data (constants are annihilated, curl of (-y, x) is 2).
inline LocalWeakOperator weak_curl_operator(const Mesh& mesh, int K, int deg_o, int deg_b,
                                            int m) {
  detail::ElementScratch s(mesh, K);
  TriBasis bo(s.g, deg_o), bm(s.g, m);
  int no = bo.dim(), nm = bm.dim(), nb = deg_b + 1;
  int nloc = 2 * no + 6 * nb;

  QuadratureRule tri = for_element(triangle_quadrature(std::max(deg_o + m, 2 * m)), s.g);
  MassMatrix M = mass_matrix(bm, tri);

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(nm, nloc);
  Eigen::MatrixXd Vo = basis_values(bo, tri.points);
  auto [Gx, Gy] = basis_gradients(bm, tri.points);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(tri.weights.data(), tri.weights.size());
  R.block(0, 0, nm, no) = Gy * w.asDiagonal() * Vo.transpose();
  R.block(0, no, nm, no) = -(Gx * w.asDiagonal() * Vo.transpose());

  EdgeRule eref = edge_quadrature(deg_b + m);
  for (int l = 0; l < 3; ++l) {
    const Edge& e = mesh.edge(s.edge_id[l]);
    QuadratureRule er = for_edge(eref, e, mesh);
    EdgeBasis eb(e, deg_b);
    Eigen::MatrixXd Vb = basis_values(eb, er.points);
    Eigen::MatrixXd Vm = basis_values(bm, er.points);
    Eigen::VectorXd ew = Eigen::Map<const Eigen::VectorXd>(er.weights.data(), er.weights.size());
    Eigen::MatrixXd T = Vm * ew.asDiagonal() * Vb.transpose();
    const Vec2 n = s.g.outward_normal[l];
    R.block(0, 2 * no + l * 2 * nb, nm, nb) += -n.y() * T;
    R.block(0, 2 * no + l * 2 * nb + nb, nm, nb) += n.x() * T;
  }

  LocalWeakOperator op;
  op.target_degree = m;
  op.matrix = M.solve(R);
  return op;
}

// L2 projection of a callable onto P_s(K).
inline Eigen::VectorXd l2_project_interior(const Mesh& mesh, int K,
                                           const std::function<double(Vec2)>& f, int s,
                                           int quad_degree) {
  const ElementGeometry& g = mesh.geometry(K);
  TriBasis b(g, s);
  QuadratureRule rule = for_element(triangle_quadrature(std::max(quad_degree, 2 * s)), g);
  MassMatrix M = mass_matrix(b, rule);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.dim());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    double fv = f(rule.points[q]);
    for (int i = 0; i < b.dim(); ++i) rhs[i] += rule.weights[q] * fv * b.value(i, rule.points[q]);
  }
  return M.solve(rhs);
}

// L2 projection of a callable onto P_s(e).
inline Eigen::VectorXd l2_project_edge(const Mesh& mesh, int e,
                                       const std::function<double(Vec2)>& f, int s,
                                       int quad_degree) {
  const Edge& ed = mesh.edge(e);
  EdgeBasis b(ed, s);
  QuadratureRule rule = for_edge(edge_quadrature(std::max(quad_degree, 2 * s)), ed, mesh);
  MassMatrix M = mass_matrix(b, rule);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.dim());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    double fv = f(rule.points[q]);
    for (int i = 0; i < b.dim(); ++i) rhs[i] += rule.weights[q] * fv * b.value(i, rule.points[q]);
  }
  return M.solve(rhs);
}

// Local Raviart-Thomas space RT_s(K) = [P_s(K)]^2 + x P~_s(K) and the
// moment-defined projection: edge-normal moments against P_s(e) and interior
// moments against [P_{s-1}(K)]^2. Coefficients: [2*dim P_s | s+1 tail terms],
// the tail multiplying (x - x_K)/h_K times the homogeneous degree-s monomials.
class RTProjection {
public:
  RTProjection(const Mesh& mesh, int K, int s) : mesh_(&mesh), K_(K), s_(s), g_(mesh.geometry(K)) {
    if (s < 1) throw std::invalid_argument("RTProjection: s >= 1 required");
    basis_ = TriBasis(g_, s);
    ns_ = basis_.dim();
    dim_ = 2 * ns_ + (s + 1);
    n_moments_ = 3 * (s + 1) + 2 * tri_space_dim(s - 1);
    if (n_moments_ != dim_) throw std::logic_error("RTProjection: moment count mismatch");

    Eigen::MatrixXd A(dim_, dim_);
    for (int j = 0; j < dim_; ++j) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(dim_);
      unit[j] = 1.0;
      A.col(j) = moments_of([&](const Vec2& p) { return eval(unit, p); }, 2 * s + 2);
    }
    qr_.compute(A);
    if (qr_.rank() < dim_) throw std::runtime_error("RTProjection: singular moment matrix");
  }

  int dim() const { return dim_; }

  Eigen::VectorXd project(const std::function<Vec2(Vec2)>& v, int quad_degree) const {
    return qr_.solve(moments_of(v, quad_degree));
  }

  Vec2 eval(const Eigen::VectorXd& c, const Vec2& p) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < ns_; ++i) {
      double m = basis_.value(i, p);
      r.x() += c[i] * m;
      r.y() += c[ns_ + i] * m;
    }
    Vec2 xhat = (p - g_.centroid) / g_.diameter;
    for (int j = 0; j <= s_; ++j) {
      double mu = basis_.value(hom_index(j), p);
      r += c[2 * ns_ + j] * mu * xhat;
    }
    return r;
  }

  double divergence(const Eigen::VectorXd& c, const Vec2& p) const {
    double r = 0;
    for (int i = 0; i < ns_; ++i) {
      Vec2 gr = basis_.grad(i, p);
      r += c[i] * gr.x() + c[ns_ + i] * gr.y();
    }
    Vec2 xhat = (p - g_.centroid) / g_.diameter;
    for (int j = 0; j <= s_; ++j) {
      int i = hom_index(j);
      // div(xhat mu) = (div xhat) mu + xhat . grad mu = (2/h) mu + xhat . grad mu
      r += c[2 * ns_ + j] *
           (2.0 / g_.diameter * basis_.value(i, p) + xhat.dot(basis_.grad(i, p)));
    }
    return r;
  }

  Eigen::VectorXd tail(const Eigen::VectorXd& c) const { return c.tail(s_ + 1); }

  // L2 projection of the RT function onto [P_s]^2 (exact when the tail vanishes).
  Eigen::VectorXd to_polynomial(const Eigen::VectorXd& c) const {
    QuadratureRule rule = for_element(triangle_quadrature(2 * s_ + 2), g_);
    MassMatrix M = mass_matrix(basis_, rule);
    Eigen::VectorXd rx = Eigen::VectorXd::Zero(ns_), ry = Eigen::VectorXd::Zero(ns_);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vec2 v = eval(c, rule.points[q]);
      for (int i = 0; i < ns_; ++i) {
        double m = basis_.value(i, rule.points[q]);
        rx[i] += rule.weights[q] * v.x() * m;
        ry[i] += rule.weights[q] * v.y() * m;
      }
    }
    Eigen::VectorXd out(2 * ns_);
    out.head(ns_) = M.solve(rx);
    out.tail(ns_) = M.solve(ry);
    return out;
  }

private:
  int hom_index(int j) const { return basis_.index_of(s_ - j, j); }

  Eigen::VectorXd moments_of(const std::function<Vec2(Vec2)>& v, int quad_degree) const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
    int row = 0;
    EdgeRule eref = edge_quadrature(std::max(quad_degree, 2 * s_ + 2));
    for (int l = 0; l < 3; ++l) {
      const Edge& e = mesh_->edge(mesh_->element_edge(K_, l));
      EdgeBasis eb(e, s_);
      QuadratureRule er = for_edge(eref, e, *mesh_);
      const Vec2 n = g_.outward_normal[l];
      for (int j = 0; j < eb.dim(); ++j, ++row)
        for (std::size_t q = 0; q < er.points.size(); ++q)
          m[row] += er.weights[q] * v(er.points[q]).dot(n) * eb.value(j, er.points[q]);
    }
    TriBasis bsm1(g_, s_ - 1);
    QuadratureRule tr = for_element(triangle_quadrature(std::max(quad_degree, 2 * s_ + 2)), g_);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < bsm1.dim(); ++i, ++row)
        for (std::size_t q = 0; q < tr.points.size(); ++q)
          m[row] += tr.weights[q] * v(tr.points[q])[c] * bsm1.value(i, tr.points[q]);
    return m;
  }

  const Mesh* mesh_;
  int K_, s_;
  ElementGeometry g_;
  TriBasis basis_;
  int ns_ = 0, dim_ = 0, n_moments_ = 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

}  // namespace mhdwg
