// Scaled monomial bases on triangles and edges, and their mass matrices.
// Triangle basis: ((x-x_K)/h_K)^a ((y-y_K)/h_K)^b with a+b <= s, centered at
// the centroid; the first function is the constant 1.

#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mhdwg/mesh.hpp"
#include "mhdwg/quadrature.hpp"

namespace mhdwg {

inline int tri_space_dim(int s) { return (s + 1) * (s + 2) / 2; }
inline int edge_space_dim(int s) { return s + 1; }

class TriBasis {
public:
  TriBasis() = default;
  TriBasis(const ElementGeometry& g, int degree)
      : center_(g.centroid), h_(g.diameter), degree_(degree) {
    for (int d = 0; d <= degree; ++d)
      for (int a = d; a >= 0; --a) powers_.emplace_back(a, d - a);
  }

  int degree() const { return degree_; }
  int dim() const { return static_cast<int>(powers_.size()); }
  const Vec2& center() const { return center_; }
  double scale() const { return h_; }
  std::pair<int, int> powers(int i) const { return powers_[i]; }

  double value(int i, const Vec2& p) const {
    auto [a, b] = powers_[i];
    return ipow((p.x() - center_.x()) / h_, a) * ipow((p.y() - center_.y()) / h_, b);
  }

  Vec2 grad(int i, const Vec2& p) const {
    auto [a, b] = powers_[i];
    double X = (p.x() - center_.x()) / h_;
    double Y = (p.y() - center_.y()) / h_;
    Vec2 g = Vec2::Zero();
    if (a > 0) g.x() = a * ipow(X, a - 1) * ipow(Y, b) / h_;
    if (b > 0) g.y() = b * ipow(X, a) * ipow(Y, b - 1) / h_;
    return g;
  }

  // Index of the monomial with the given powers, or -1.
  int index_of(int a, int b) const {
    if (a < 0 || b < 0 || a + b > degree_) return -1;
    int d = a + b;
    return d * (d + 1) / 2 + (d - a);
  }

private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  Vec2 center_ = Vec2::Zero();
  double h_ = 1.0;
  int degree_ = 0;
  std::vector<std::pair<int, int>> powers_;
};

// d/dx as a coefficient map between same-centered bases: to.degree >= from.degree-1.
inline Eigen::MatrixXd dx_matrix(const TriBasis& from, const TriBasis& to) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(to.dim(), from.dim());
  for (int i = 0; i < from.dim(); ++i) {
    auto [a, b] = from.powers(i);
    if (a == 0) continue;
    int j = to.index_of(a - 1, b);
    if (j < 0) throw std::invalid_argument("dx_matrix: target degree too low");
    D(j, i) = a / from.scale();
  }
  return D;
}

inline Eigen::MatrixXd dy_matrix(const TriBasis& from, const TriBasis& to) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(to.dim(), from.dim());
  for (int i = 0; i < from.dim(); ++i) {
    auto [a, b] = from.powers(i);
    if (b == 0) continue;
    int j = to.index_of(a, b - 1);
    if (j < 0) throw std::invalid_argument("dy_matrix: target degree too low");
    D(j, i) = b / from.scale();
  }
  return D;
}

// Scaled monomials along an edge: (2 (p - mid) . t / len)^j, j = 0..s.
class EdgeBasis {
public:
  EdgeBasis() = default;
  EdgeBasis(const Edge& e, int degree)
      : mid_(e.midpoint), tangent_(e.tangent), half_(0.5 * e.length), degree_(degree) {}

  int degree() const { return degree_; }
  int dim() const { return degree_ + 1; }

  double value(int j, const Vec2& p) const {
    double s = (p - mid_).dot(tangent_) / half_;
    double r = 1.0;
    for (int i = 0; i < j; ++i) r *= s;
    return r;
  }

private:
  Vec2 mid_ = Vec2::Zero();
  Vec2 tangent_ = Vec2::Zero();
  double half_ = 1.0;
  int degree_ = 0;
};

// Values of all basis functions at the given points, one column per point.
inline Eigen::MatrixXd basis_values(const TriBasis& b, const std::vector<Vec2>& pts) {
  Eigen::MatrixXd V(b.dim(), pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q)
    for (int i = 0; i < b.dim(); ++i) V(i, q) = b.value(i, pts[q]);
  return V;
}

inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> basis_gradients(const TriBasis& b,
                                                                   const std::vector<Vec2>& pts) {
  Eigen::MatrixXd Gx(b.dim(), pts.size()), Gy(b.dim(), pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q)
    for (int i = 0; i < b.dim(); ++i) {
      Vec2 g = b.grad(i, pts[q]);
      Gx(i, q) = g.x();
      Gy(i, q) = g.y();
    }
  return {Gx, Gy};
}

inline Eigen::MatrixXd basis_values(const EdgeBasis& b, const std::vector<Vec2>& pts) {
  Eigen::MatrixXd V(b.dim(), pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q)
    for (int i = 0; i < b.dim(); ++i) V(i, q) = b.value(i, pts[q]);
  return V;
}

// SPD mass matrix with a reusable Cholesky factorization.
struct MassMatrix {
  Eigen::MatrixXd M;
  Eigen::LLT<Eigen::MatrixXd> llt;

  void factorize() {
    llt.compute(M);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("MassMatrix: not SPD (quadrature order bug?)");
  }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt.solve(rhs); }
};

inline MassMatrix mass_matrix(const TriBasis& b, const QuadratureRule& phys_rule) {
  Eigen::MatrixXd V = basis_values(b, phys_rule.points);
  Eigen::VectorXd w =
      Eigen::Map<const Eigen::VectorXd>(phys_rule.weights.data(), phys_rule.weights.size());
  MassMatrix mm;
  mm.M = V * w.asDiagonal() * V.transpose();
  mm.factorize();
  return mm;
}

inline MassMatrix mass_matrix(const EdgeBasis& b, const QuadratureRule& phys_rule) {
  Eigen::MatrixXd V = basis_values(b, phys_rule.points);
  Eigen::VectorXd w =
      Eigen::Map<const Eigen::VectorXd>(phys_rule.weights.data(), phys_rule.weights.size());
  MassMatrix mm;
  mm.M = V * w.asDiagonal() * V.transpose();
  mm.factorize();
  return mm;
}

}  // namespace mhdwg
