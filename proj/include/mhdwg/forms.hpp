// Element-level evaluation of the bilinear/trilinear forms and stabilizers of
// the WG scheme, the triple-bar norms, and the per-element operator caches
// shared by the assembler and the error harness.
//
//   a_h(u,v)  = Ha^-2 (grad_{w,k-1} u, grad_{w,k-1} v) + Ha^-2 <tau (u_o-u_b), v_o-v_b>
//   at_h(B,w) = Rm^-2 (curl_{w,k-1} B, curl_{w,k-1} w) + Rm^-2 <tau (B_o-B_b)xn, (w_o-w_b)xn>
//   b_h(v,q)  = (grad_{w,k} q, v_o)          bt_h(w,th) = Rm^-1 (grad_{w,k} th, w_o)
//   c_h(Phi;u,v)  = 1/(2N) [ (div_w {u_o otimes Phi_o, u_b otimes Phi_b}, v_o) - (u <-> v) ]
//   ct_h(v;B,w)   = Rm^-1 (curl_{w,k} w, v_o x B_o)
// with tau = h_K^-1.

#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mhdwg/fields.hpp"
#include "mhdwg/mesh.hpp"
#include "mhdwg/polybasis.hpp"
#include "mhdwg/quadrature.hpp"
#include "mhdwg/weakops.hpp"

namespace mhdwg {

struct PhysicalParams {
  double Ha = 1.0;  // Hartmann number
  double N = 1.0;   // interaction parameter
  double Rm = 1.0;  // magnetic Reynolds number
  int k = 1;        // polynomial order, k >= 1

  void validate() const {
    if (!(Ha > 0) || !(N > 0) || !(Rm > 0)) throw std::invalid_argument("params must be positive");
    if (k < 1) throw std::invalid_argument("polynomial order k must be >= 1");
  }
};

class FormContext {
public:
  struct EdgeCache {
    Eigen::VectorXd w;       // quadrature weights (sum to edge length)
    std::vector<Vec2> pts;
    Eigen::MatrixXd Vk;      // degree-k interior basis values at edge points
    Eigen::MatrixXd Vb;      // degree-k trace basis values
    Vec2 n;                  // outward normal of this element
  };

  struct ElementCache {
    ElementGeometry g;
    TriBasis bk, bkm1;
    // volume quadrature, exact to 3k+2
    std::vector<Vec2> pts;
    Eigen::VectorXd w;
    Eigen::MatrixXd Vk, Vkm1;     // basis values at volume points
    Eigen::MatrixXd Gkx, Gky;     // degree-k basis gradients at volume points
    EdgeCache edge[3];

    // weak operators
    Eigen::MatrixXd Gu;    // scalar (deg k, trace k)   -> [P_{k-1}]^2
    Eigen::MatrixXd Gp;    // scalar (deg k-1, trace k) -> [P_k]^2
    Eigen::MatrixXd Ckm1;  // vector -> P_{k-1}
    Eigen::MatrixXd Ck;    // vector -> P_k

    Eigen::MatrixXd Mk, Mkm1;  // scalar mass matrices

    // unscaled quadratic forms over local layouts
    Eigen::MatrixXd NV;   // |||.|||_V^2 contribution, vector layout
    Eigen::MatrixXd NW;   // |||.|||_W^2 contribution, vector layout
    Eigen::MatrixXd NQg;  // ||grad_{w,k} q||^2 contribution, scalar p layout
    Eigen::MatrixXd Bvq;  // (grad_{w,k} q, v_o): vector rows (interior only) x p layout
    Eigen::VectorXd ones_km1;  // integral of each P_{k-1} basis function over K
  };

  FormContext(const Mesh& mesh, const PhysicalParams& prm) : mesh_(&mesh), prm_(prm) {
    prm_.validate();
    const int k = prm_.k;
    no_ = tri_space_dim(k);
    nb_ = k + 1;
    np_o_ = tri_space_dim(k - 1);
    nv_ = 2 * no_ + 6 * nb_;
    np_ = np_o_ + 3 * nb_;

    QuadratureRule tri_ref = triangle_quadrature(3 * k + 2);
    EdgeRule edge_ref = edge_quadrature(3 * k + 2);

    cache_.resize(mesh.num_elements());
    for (int K = 0; K < mesh.num_elements(); ++K) {
      ElementCache& c = cache_[K];
      c.g = mesh.geometry(K);
      c.bk = TriBasis(c.g, k);
      c.bkm1 = TriBasis(c.g, k - 1);

      QuadratureRule tri = for_element(tri_ref, c.g);
      c.pts = tri.points;
      c.w = Eigen::Map<const Eigen::VectorXd>(tri.weights.data(), tri.weights.size());
      c.Vk = basis_values(c.bk, c.pts);
      c.Vkm1 = basis_values(c.bkm1, c.pts);
      auto [gx, gy] = basis_gradients(c.bk, c.pts);
      c.Gkx = gx;
      c.Gky = gy;

      for (int l = 0; l < 3; ++l) {
        const Edge& e = mesh.edge(mesh.element_edge(K, l));
        QuadratureRule er = for_edge(edge_ref, e, mesh);
        EdgeCache& ec = c.edge[l];
        ec.pts = er.points;
        ec.w = Eigen::Map<const Eigen::VectorXd>(er.weights.data(), er.weights.size());
        ec.Vk = basis_values(c.bk, ec.pts);
        ec.Vb = basis_values(EdgeBasis(e, k), ec.pts);
        ec.n = c.g.outward_normal[l];
      }

      c.Gu = weak_gradient_operator(mesh, K, k, k, k - 1).matrix;
      c.Gp = weak_gradient_operator(mesh, K, k - 1, k, k).matrix;
      c.Ckm1 = weak_curl_operator(mesh, K, k, k, k - 1).matrix;
      c.Ck = weak_curl_operator(mesh, K, k, k, k).matrix;

      c.Mk = c.Vk * c.w.asDiagonal() * c.Vk.transpose();
      c.Mkm1 = c.Vkm1 * c.w.asDiagonal() * c.Vkm1.transpose();

      build_quadratic_forms(K, c);
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  const PhysicalParams& params() const { return prm_; }
  int k() const { return prm_.k; }
  int n_interior_scalar() const { return no_; }
  int n_trace_scalar() const { return nb_; }
  int n_local_vector() const { return nv_; }
  int n_local_pressure() const { return np_; }
  int n_interior_pressure() const { return np_o_; }
  const ElementCache& cache(int K) const { return cache_[K]; }

  // scalar local index -> vector local index for component c
  int vec_index(int c, int scalar_index) const {
    if (scalar_index < no_) return c * no_ + scalar_index;
    int rem = scalar_index - no_;
    int l = rem / nb_, j = rem % nb_;
    return 2 * no_ + l * 2 * nb_ + c * nb_ + j;
  }

  // State tables for the trilinear terms: values of a vector field at the
  // cached volume points and of its traces at the cached edge points.
  struct StateTables {
    Eigen::VectorXd ox, oy;          // interior values at volume points
    Eigen::VectorXd bx[3], by[3];    // trace values at edge points
    Eigen::VectorXd bn[3];           // trace normal components
  };

  StateTables state_tables(int K, const WGVectorField& f) const {
    const ElementCache& c = cache_[K];
    StateTables t;
    Eigen::VectorXd cx = f.component(0).interior(K), cy = f.component(1).interior(K);
    t.ox = c.Vk.transpose() * cx;
    t.oy = c.Vk.transpose() * cy;
    for (int l = 0; l < 3; ++l) {
      int e = mesh_->element_edge(K, l);
      t.bx[l] = c.edge[l].Vb.transpose() * f.component(0).trace(e);
      t.by[l] = c.edge[l].Vb.transpose() * f.component(1).trace(e);
      t.bn[l] = c.edge[l].n.x() * t.bx[l] + c.edge[l].n.y() * t.by[l];
    }
    return t;
  }

  // c_h trilinear local matrix (rows test v, cols trial u) for a frozen
  // transport state Phi; antisymmetric by construction.
  Eigen::MatrixXd local_c_matrix(int K, const StateTables& phi) const {
    const ElementCache& c = cache_[K];
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nv_, nv_);
    // -(u_o)_c (Phi_o . grad (v_o)_c), interior-interior
    Eigen::MatrixXd A =
        -(c.Gkx * (c.w.cwiseProduct(phi.ox)).asDiagonal() + c.Gky * (c.w.cwiseProduct(phi.oy)).asDiagonal()) *
        c.Vk.transpose();
    for (int cc = 0; cc < 2; ++cc) T.block(cc * no_, cc * no_, no_, no_) += A;
    // <(u_b)_c (Phi_b . n), (v_o)_c>, interior rows x trace cols
    for (int l = 0; l < 3; ++l) {
      const EdgeCache& ec = c.edge[l];
      Eigen::MatrixXd E = ec.Vk * (ec.w.cwiseProduct(phi.bn[l])).asDiagonal() * ec.Vb.transpose();
      for (int cc = 0; cc < 2; ++cc)
        T.block(cc * no_, 2 * no_ + l * 2 * nb_ + cc * nb_, no_, nb_) += E;
    }
    double s = 1.0 / (2.0 * prm_.N);
    return s * (T - T.transpose());
  }

  // ct_h coupling block (rows test v, cols trial B) for frozen Psi:
  //   Rm^-1 (curl_{w,k} B, v_o x Psi_o).
  Eigen::MatrixXd local_ctilde_matrix(int K, const StateTables& psi) const {
    const ElementCache& c = cache_[K];
    Eigen::MatrixXd U = c.Vk.transpose() * c.Ck;  // curl values at volume points x B dofs
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nv_, nv_);
    // v = e_x b_i: v x Psi = b_i Psi_y ; v = e_y b_i: v x Psi = -b_i Psi_x
    T.block(0, 0, no_, nv_) = c.Vk * (c.w.cwiseProduct(psi.oy)).asDiagonal() * U;
    T.block(no_, 0, no_, nv_) = -(c.Vk * (c.w.cwiseProduct(psi.ox)).asDiagonal() * U);
    return (1.0 / prm_.Rm) * T;
  }

  // Known trilinear term on the magnetic right-hand side:
  //   rhs_w += Rm^-1 (curl_{w,k} w, Phi_o x Psi_o)  for all test dofs w.
  Eigen::VectorXd local_ctilde_rhs(int K, const StateTables& phi, const StateTables& psi) const {
    const ElementCache& c = cache_[K];
    Eigen::VectorXd cross = phi.ox.cwiseProduct(psi.oy) - phi.oy.cwiseProduct(psi.ox);
    Eigen::VectorXd moments = c.Vk * c.w.cwiseProduct(cross);
    return (1.0 / prm_.Rm) * (c.Ck.transpose() * moments);
  }

  Eigen::MatrixXd local_a_matrix(int K) const { return (1.0 / (prm_.Ha * prm_.Ha)) * cache_[K].NV; }
  Eigen::MatrixXd local_atilde_matrix(int K) const {
    return (1.0 / (prm_.Rm * prm_.Rm)) * cache_[K].NW;
  }
  const Eigen::MatrixXd& local_b_matrix(int K) const { return cache_[K].Bvq; }
  Eigen::MatrixXd local_btilde_matrix(int K) const { return (1.0 / prm_.Rm) * cache_[K].Bvq; }

private:
  void build_quadratic_forms(int K, ElementCache& c) {
    const Mesh& mesh = *mesh_;
    const int k = prm_.k;
    double hinv = 1.0 / c.g.diameter;
    if (const char* ts = std::getenv("MHDWG_TAU_SCALE")) hinv *= std::atof(ts);

    Eigen::MatrixXd Mkm1_vec = Eigen::MatrixXd::Zero(2 * np_o_, 2 * np_o_);
    Mkm1_vec.topLeftCorner(np_o_, np_o_) = c.Mkm1;
    Mkm1_vec.bottomRightCorner(np_o_, np_o_) = c.Mkm1;
    Eigen::MatrixXd Mk_vec = Eigen::MatrixXd::Zero(2 * no_, 2 * no_);
    Mk_vec.topLeftCorner(no_, no_) = c.Mk;
    Mk_vec.bottomRightCorner(no_, no_) = c.Mk;

    // scalar jump stabilizer sum_e h^-1 int_e (v_o - v_b)^2 over the scalar layout
    int ns = no_ + 3 * nb_;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(ns, ns);
    for (int l = 0; l < 3; ++l) {
      const EdgeCache& ec = c.edge[l];
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(ns, ec.pts.size());
      J.topRows(no_) = ec.Vk;
      J.middleRows(no_ + l * nb_, nb_) = -ec.Vb;
      S += hinv * (J * ec.w.asDiagonal() * J.transpose());
    }

    // |||v|||_V^2 = sum_c (Gu v_c)^T Mvec (Gu v_c) + sum_c v_c^T S v_c
    Eigen::MatrixXd NV_s = c.Gu.transpose() * Mkm1_vec * c.Gu + S;
    c.NV = Eigen::MatrixXd::Zero(nv_, nv_);
    for (int cc = 0; cc < 2; ++cc)
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) c.NV(vec_index(cc, i), vec_index(cc, j)) += NV_s(i, j);

    // |||w|||_W^2 = (Ckm1 w)^T Mkm1 (Ckm1 w) + sum_e h^-1 int ((w_o - w_b) x n)^2
    double hinvW = hinv;
    if (const char* ts = std::getenv("MHDWG_TAUW_SCALE")) hinvW = std::atof(ts) / c.g.diameter;
    c.NW = c.Ckm1.transpose() * c.Mkm1 * c.Ckm1;
    bool full_jump = std::getenv("MHDWG_FULL_JUMP") != nullptr;
    bool curl_k = std::getenv("MHDWG_CURL_K") != nullptr;
    if (curl_k) c.NW = c.Ck.transpose() * c.Mk * c.Ck;
    if (const char* bp = std::getenv("MHDWG_BN_PEN")) {
      // penalty on B_o . n over boundary edges (mechanism probe only)
      double gam = std::atof(bp) / c.g.diameter;
      for (int l = 0; l < 3; ++l) {
        const EdgeCache& ec = c.edge[l];
        if (!mesh.edge(mesh.element_edge(K, l)).boundary) continue;
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(nv_, ec.pts.size());
        X.middleRows(0, no_) = ec.n.x() * ec.Vk;
        X.middleRows(no_, no_) = ec.n.y() * ec.Vk;
        c.NW += gam * (X * ec.w.asDiagonal() * X.transpose());
      }
    }
    for (int l = 0; l < 3; ++l) {
      const EdgeCache& ec = c.edge[l];
      if (full_jump) {
        for (int cc = 0; cc < 2; ++cc) {
          Eigen::MatrixXd X = Eigen::MatrixXd::Zero(nv_, ec.pts.size());
          X.middleRows(cc * no_, no_) = ec.Vk;
          X.middleRows(2 * no_ + l * 2 * nb_ + cc * nb_, nb_) = -ec.Vb;
          c.NW += hinvW * (X * ec.w.asDiagonal() * X.transpose());
        }
        continue;
      }
      // (w x n) = w_x n_y - w_y n_x evaluated for (w_o - w_b)
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(nv_, ec.pts.size());
      X.middleRows(0, no_) = ec.n.y() * ec.Vk;
      X.middleRows(no_, no_) = -ec.n.x() * ec.Vk;
      X.middleRows(2 * no_ + l * 2 * nb_, nb_) = -ec.n.y() * ec.Vb;
      X.middleRows(2 * no_ + l * 2 * nb_ + nb_, nb_) = ec.n.x() * ec.Vb;
      c.NW += hinvW * (X * ec.w.asDiagonal() * X.transpose());
    }

    // ||grad_{w,k} q||_{0,K}^2 over the p layout
    c.NQg = c.Gp.transpose() * Mk_vec * c.Gp;

    // b_h local: (grad_{w,k} q, v_o) = -(q_o, div v_o) + <q_b, v_o . n>
    c.Bvq = Eigen::MatrixXd::Zero(nv_, np_);
    Eigen::MatrixXd Bx = -(c.Gkx * c.w.asDiagonal() * c.Vkm1.transpose());
    Eigen::MatrixXd By = -(c.Gky * c.w.asDiagonal() * c.Vkm1.transpose());
    c.Bvq.block(0, 0, no_, np_o_) = Bx;
    c.Bvq.block(no_, 0, no_, np_o_) = By;
    for (int l = 0; l < 3; ++l) {
      const EdgeCache& ec = c.edge[l];
      Eigen::MatrixXd E = ec.Vk * ec.w.asDiagonal() * ec.Vb.transpose();
      c.Bvq.block(0, np_o_ + l * nb_, no_, nb_) += ec.n.x() * E;
      c.Bvq.block(no_, np_o_ + l * nb_, no_, nb_) += ec.n.y() * E;
    }

    c.ones_km1 = c.Vkm1 * c.w;
    (void)k;
  }

  const Mesh* mesh_;
  PhysicalParams prm_;
  int no_ = 0, nb_ = 0, np_o_ = 0, nv_ = 0, np_ = 0;
  std::vector<ElementCache> cache_;
};

namespace detail {

inline void check_same_mesh(const FormContext& ctx, const WGScalarField& f) {
  if (&ctx.mesh() != &f.mesh()) throw std::invalid_argument("form: field on a different mesh");
}
inline void check_same_mesh(const FormContext& ctx, const WGVectorField& f) {
  check_same_mesh(ctx, f.component(0));
}

}  // namespace detail

// ---- global forms ----------------------------------------------------------

inline double form_a(const FormContext& ctx, const WGVectorField& u, const WGVectorField& v) {
  detail::check_same_mesh(ctx, u);
  detail::check_same_mesh(ctx, v);
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K)
    s += u.local_dofs(K).dot(ctx.local_a_matrix(K) * v.local_dofs(K));
  return s;
}

inline double form_atilde(const FormContext& ctx, const WGVectorField& B, const WGVectorField& w) {
  detail::check_same_mesh(ctx, B);
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K)
    s += B.local_dofs(K).dot(ctx.local_atilde_matrix(K) * w.local_dofs(K));
  return s;
}

inline double form_b(const FormContext& ctx, const WGVectorField& v, const WGScalarField& q) {
  detail::check_same_mesh(ctx, v);
  detail::check_same_mesh(ctx, q);
  if (q.interior_degree() != ctx.k() - 1 || q.trace_degree() != ctx.k())
    throw std::invalid_argument("form_b: pressure-type field must have degrees (k-1, k)");
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K)
    s += v.local_dofs(K).dot(ctx.local_b_matrix(K) * q.local_dofs(K));
  return s;
}

inline double form_btilde(const FormContext& ctx, const WGVectorField& w, const WGScalarField& th) {
  return form_b(ctx, w, th) / ctx.params().Rm;
}

inline double form_c(const FormContext& ctx, const WGVectorField& Phi, const WGVectorField& u,
                     const WGVectorField& v) {
  detail::check_same_mesh(ctx, Phi);
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    auto phi = ctx.state_tables(K, Phi);
    s += v.local_dofs(K).dot(ctx.local_c_matrix(K, phi) * u.local_dofs(K));
  }
  return s;
}

inline double form_ctilde(const FormContext& ctx, const WGVectorField& v, const WGVectorField& B,
                          const WGVectorField& w) {
  detail::check_same_mesh(ctx, v);
  double s = 0;
  // Rm^-1 (curl_{w,k} w, v_o x B_o), evaluated elementwise by quadrature
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    const auto& c = ctx.cache(K);
    Eigen::VectorXd curlw = c.Vk.transpose() * (c.Ck * w.local_dofs(K));
    auto tv = ctx.state_tables(K, v);
    auto tB = ctx.state_tables(K, B);
    Eigen::VectorXd cross = tv.ox.cwiseProduct(tB.oy) - tv.oy.cwiseProduct(tB.ox);
    s += curlw.dot(c.w.cwiseProduct(cross));
  }
  return s / ctx.params().Rm;
}

// stabilizer parts in isolation (diagnostics/tests)
inline double form_s(const FormContext& ctx, const WGVectorField& u, const WGVectorField& v) {
  double full = form_a(ctx, u, v);
  // remove the weak-gradient part
  double grad = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    const auto& c = ctx.cache(K);
    for (int cc = 0; cc < 2; ++cc) {
      Eigen::VectorXd ul = u.component(cc).local_dofs(K), vl = v.component(cc).local_dofs(K);
      Eigen::VectorXd gu = c.Gu * ul, gv = c.Gu * vl;
      int nm = tri_space_dim(ctx.k() - 1);
      grad += gu.head(nm).dot(c.Mkm1 * gv.head(nm)) + gu.tail(nm).dot(c.Mkm1 * gv.tail(nm));
    }
  }
  return full - grad / (ctx.params().Ha * ctx.params().Ha);
}

// ---- norms -----------------------------------------------------------------

inline double norm_V(const FormContext& ctx, const WGVectorField& v) {
  detail::check_same_mesh(ctx, v);
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    Eigen::VectorXd x = v.local_dofs(K);
    s += x.dot(ctx.cache(K).NV * x);
  }
  return std::sqrt(std::max(0.0, s));
}

inline double norm_W(const FormContext& ctx, const WGVectorField& w) {
  detail::check_same_mesh(ctx, w);
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    Eigen::VectorXd x = w.local_dofs(K);
    s += x.dot(ctx.cache(K).NW * x);
  }
  return std::sqrt(std::max(0.0, s));
}

inline double norm_Q(const FormContext& ctx, const WGScalarField& q) {
  detail::check_same_mesh(ctx, q);
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    const auto& c = ctx.cache(K);
    Eigen::VectorXd x = q.local_dofs(K);
    double h2 = c.g.diameter * c.g.diameter;
    s += q.interior(K).dot(c.Mkm1 * q.interior(K)) + h2 * x.dot(c.NQg * x);
  }
  return std::sqrt(std::max(0.0, s));
}

inline double norm_R(const FormContext& ctx, const WGScalarField& th) {
  detail::check_same_mesh(ctx, th);
  double s = 0, mean = 0, area = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    const auto& c = ctx.cache(K);
    mean += c.ones_km1.dot(th.interior(K));
    area += c.g.area;
  }
  mean /= area;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    const auto& c = ctx.cache(K);
    Eigen::VectorXd x = th.local_dofs(K);
    double h2 = c.g.diameter * c.g.diameter;
    // ||th_o - mean||^2 on K: expand (th_o - mean)^2
    Eigen::VectorXd ci = th.interior(K);
    double l2 = ci.dot(c.Mkm1 * ci) - 2 * mean * c.ones_km1.dot(ci) + mean * mean * c.g.area;
    s += l2 + h2 * x.dot(c.NQg * x);
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace mhdwg
