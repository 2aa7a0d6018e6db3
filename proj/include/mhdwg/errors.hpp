// Error measurement against manufactured solutions: the L2, broken and
// weak-operator error norms reported by the convergence tables, the
// divergence metrics, and the interpolants used by the projection-rate
// sanity layer ({P_k^RT u, Q_k^b u} for vector fields, {Q_{k-1}, Q_k^b} for
// scalars).

#pragma once

#include <cmath>
#include <functional>

#include "mhdwg/fields.hpp"
#include "mhdwg/forms.hpp"
#include "mhdwg/manufactured.hpp"
#include "mhdwg/solver.hpp"
#include "mhdwg/weakops.hpp"

namespace mhdwg {

struct ErrorReport {
  // relative errors, ordered as reported
  double u_l2 = 0;      // ||u - u_ho|| / ||u||
  double u_bgrad = 0;   // ||grad u - grad_h u_ho|| / ||grad u||
  double u_wgrad = 0;   // ||grad u - grad_{w,k-1} u_h|| / ||grad u||
  double B_bcurl = 0;   // ||curl B - curl_h B_ho|| / ||grad B||
  double B_wcurl = 0;   // ||curl B - curl_{w,k-1} B_h|| / ||grad B||
  double B_l2 = 0;      // ||B - B_ho|| / ||B||
  double p_l2 = 0;      // ||p - p_ho|| / ||p||
  double p_wgrad_h = 0; // h ||grad p - grad_{w,k} p_h|| / ||grad p||
  double r_l2_adj = 0;  // mean-adjusted ||r - r_ho - (rbar - rbar_ho)|| / ||r||
  double r_wgrad_h = 0; // h ||grad r - grad_{w,k} r_h|| / ||grad r||
  double r_l2_raw = 0;  // ||r - r_ho|| / ||r||
  double div_u = 0, div_B = 0;    // max_K h_K^-1 ||div . ||_{0,K}
  double jump_u = 0, jump_B = 0;  // normal-jump metrics
};

inline ErrorReport compute_errors(const FormContext& ctx, const SolutionFields& sol,
                                  const ManufacturedCase& mc, int qdeg = 0) {
  const Mesh& mesh = ctx.mesh();
  const int k = ctx.k();
  if (qdeg <= 0) qdeg = std::max(2 * k + 4, 16);
  QuadratureRule ref = triangle_quadrature(qdeg);

  double h = mesh.max_diameter();
  double nu2 = 0, ngu2 = 0, nB2 = 0, ngB2 = 0, np2 = 0, ngp2 = 0, nr2 = 0, ngr2 = 0;
  double eu2 = 0, ebg2 = 0, ewg2 = 0, eB2 = 0, ebc2 = 0, ewc2 = 0, ep2 = 0, egp2 = 0;
  double er2 = 0, egr2 = 0;
  double rbar = 0, rhobar = 0, area = 0;

  const int nkm1 = tri_space_dim(k - 1), nk = tri_space_dim(k);

  for (int K = 0; K < mesh.num_elements(); ++K) {
    const auto& g = mesh.geometry(K);
    const auto& c = ctx.cache(K);
    QuadratureRule rule = for_element(ref, g);
    TriBasis bk(g, k), bkm1(g, k - 1);
    Eigen::MatrixXd Dx = dx_matrix(bk, bkm1), Dy = dy_matrix(bk, bkm1);

    // discrete coefficient data
    Eigen::VectorXd ux = sol.u.component(0).interior(K), uy = sol.u.component(1).interior(K);
    Eigen::VectorXd Bx = sol.B.component(0).interior(K), By = sol.B.component(1).interior(K);
    Eigen::VectorXd pc = sol.p.interior(K), rc = sol.r.interior(K);

    Eigen::VectorXd gux = Dx * ux, guy = Dy * ux, gvx = Dx * uy, gvy = Dy * uy;
    Eigen::VectorXd bcurl = Dx * By - Dy * Bx;

    // weak operators of the discrete fields
    Eigen::VectorXd wgx = c.Gu * sol.u.component(0).local_dofs(K);  // [P_{k-1}]^2
    Eigen::VectorXd wgy = c.Gu * sol.u.component(1).local_dofs(K);
    Eigen::VectorXd wcurl = c.Ckm1 * sol.B.local_dofs(K);
    Eigen::VectorXd wgp = c.Gp * sol.p.local_dofs(K);  // [P_k]^2
    Eigen::VectorXd wgr = c.Gp * sol.r.local_dofs(K);

    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = rule.points[q];
      const double w = rule.weights[q];

      Vec2 ue = mc.u(x), Be = mc.B(x);
      Eigen::Matrix2d Gue = mc.grad_u(x), GBe = mc.grad_B(x);
      double curlBe = mc.curl_B(x);
      double pe = mc.p(x), re = mc.r(x);
      Vec2 gpe = mc.grad_p(x), gre = mc.grad_r(x);

      Eigen::VectorXd vk(nk), vkm1(nkm1);
      for (int i = 0; i < nk; ++i) vk[i] = bk.value(i, x);
      for (int i = 0; i < nkm1; ++i) vkm1[i] = bkm1.value(i, x);

      Vec2 uh(ux.dot(vk), uy.dot(vk));
      Vec2 Bh(Bx.dot(vk), By.dot(vk));
      double ph = pc.dot(vkm1), rh = rc.dot(vkm1);

      nu2 += w * ue.squaredNorm();
      nB2 += w * Be.squaredNorm();
      ngu2 += w * Gue.squaredNorm();
      ngB2 += w * GBe.squaredNorm();
      np2 += w * pe * pe;
      nr2 += w * re * re;
      ngp2 += w * gpe.squaredNorm();
      ngr2 += w * gre.squaredNorm();

      eu2 += w * (ue - uh).squaredNorm();
      eB2 += w * (Be - Bh).squaredNorm();
      ep2 += w * (pe - ph) * (pe - ph);
      er2 += w * (re - rh) * (re - rh);

      // broken gradient/curl of the interior polynomials
      Eigen::Matrix2d Gh;
      Gh(0, 0) = gux.dot(vkm1);
      Gh(0, 1) = guy.dot(vkm1);
      Gh(1, 0) = gvx.dot(vkm1);
      Gh(1, 1) = gvy.dot(vkm1);
      ebg2 += w * (Gue - Gh).squaredNorm();
      ebc2 += w * std::pow(curlBe - bcurl.dot(vkm1), 2);

      // weak gradient/curl errors
      Eigen::Matrix2d Gw;
      Gw(0, 0) = wgx.head(nkm1).dot(vkm1);
      Gw(0, 1) = wgx.tail(nkm1).dot(vkm1);
      Gw(1, 0) = wgy.head(nkm1).dot(vkm1);
      Gw(1, 1) = wgy.tail(nkm1).dot(vkm1);
      ewg2 += w * (Gue - Gw).squaredNorm();
      ewc2 += w * std::pow(curlBe - wcurl.dot(vkm1), 2);

      Vec2 gph(wgp.head(nk).dot(vk), wgp.tail(nk).dot(vk));
      Vec2 grh(wgr.head(nk).dot(vk), wgr.tail(nk).dot(vk));
      egp2 += w * (gpe - gph).squaredNorm();
      egr2 += w * (gre - grh).squaredNorm();

      rbar += w * re;
      rhobar += w * rh;
      area += w;
    }
  }
  rbar /= area;
  rhobar /= area;

  // mean-adjusted r error
  double shift = rbar - rhobar;
  double eradj2 = 0;
  for (int K = 0; K < mesh.num_elements(); ++K) {
    const auto& g = mesh.geometry(K);
    QuadratureRule rule = for_element(ref, g);
    TriBasis bkm1(g, k - 1);
    Eigen::VectorXd rc = sol.r.interior(K);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      double rh = 0;
      for (int i = 0; i < nkm1; ++i) rh += rc[i] * bkm1.value(i, rule.points[q]);
      double d = mc.r(rule.points[q]) - rh - shift;
      eradj2 += rule.weights[q] * d * d;
    }
  }

  ErrorReport rep;
  auto rel = [](double e2, double n2) { return std::sqrt(e2) / std::sqrt(n2); };
  rep.u_l2 = rel(eu2, nu2);
  rep.u_bgrad = rel(ebg2, ngu2);
  rep.u_wgrad = rel(ewg2, ngu2);
  rep.B_l2 = rel(eB2, nB2);
  rep.B_bcurl = rel(ebc2, ngB2);
  rep.B_wcurl = rel(ewc2, ngB2);
  rep.p_l2 = rel(ep2, np2);
  rep.p_wgrad_h = h * rel(egp2, ngp2);
  rep.r_l2_raw = rel(er2, nr2);
  rep.r_l2_adj = rel(eradj2, nr2);
  rep.r_wgrad_h = h * rel(egr2, ngr2);

  auto [du, ju] = divergence_metrics(sol.u);
  auto [dB, jB] = divergence_metrics(sol.B);
  rep.div_u = du;
  rep.jump_u = ju;
  rep.div_B = dB;
  rep.jump_B = jB;
  return rep;
}

// ---- interpolants of the error analysis ------------------------------------

// Pi_1 / Pi_2: {P_k^RT v, Q_k^b v}; the RT projection of a solenoidal field
// lies in [P_k]^2, and is re-expanded in the monomial basis.
inline WGVectorField interpolate_velocity(const Mesh& mesh, int k,
                                          const std::function<Vec2(Vec2)>& v, int qdeg = 18) {
  WGVectorField out(mesh, k, k);
  int nk = tri_space_dim(k);
  for (int K = 0; K < mesh.num_elements(); ++K) {
    RTProjection rt(mesh, K, k);
    Eigen::VectorXd c = rt.to_polynomial(rt.project(v, qdeg));
    out.component(0).interior(K) = c.head(nk);
    out.component(1).interior(K) = c.tail(nk);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    out.component(0).trace(e) =
        l2_project_edge(mesh, e, [&](Vec2 p) { return v(p).x(); }, k, qdeg);
    out.component(1).trace(e) =
        l2_project_edge(mesh, e, [&](Vec2 p) { return v(p).y(); }, k, qdeg);
  }
  return out;
}

// Pi_3 / Pi_4: {Q^o_{k-1} s, Q^b_k s}
inline WGScalarField interpolate_scalar_pair(const Mesh& mesh, int k,
                                             const std::function<double(Vec2)>& s,
                                             int qdeg = 18) {
  WGScalarField out(mesh, k - 1, k);
  for (int K = 0; K < mesh.num_elements(); ++K)
    out.interior(K) = l2_project_interior(mesh, K, s, k - 1, qdeg);
  for (int e = 0; e < mesh.num_edges(); ++e) out.trace(e) = l2_project_edge(mesh, e, s, k, qdeg);
  return out;
}

inline SolutionFields interpolate_case(const Mesh& mesh, int k, const ManufacturedCase& mc,
                                       int qdeg = 18) {
  SolutionFields s{WGVectorField(mesh, k, k), WGVectorField(mesh, k, k),
                   WGScalarField(mesh, k - 1, k), WGScalarField(mesh, k - 1, k)};
  s.u = interpolate_velocity(mesh, k, mc.u, qdeg);
  s.B = interpolate_velocity(mesh, k, mc.B, qdeg);
  s.p = interpolate_scalar_pair(mesh, k, mc.p, qdeg);
  s.r = interpolate_scalar_pair(mesh, k, mc.r, qdeg);
  return s;
}

}  // namespace mhdwg
