// Assembly of one Oseen step: element-local blocks over (u, p, B, r), the
// boundary constraint transforms (with inhomogeneous trace lifting), sparse
// scatter of the coupled or split systems, and static condensation of the
// interior unknowns onto the traces plus the pressure-mean multiplier.
//
// Momentum row (test v): a_h(u,v) + c_h(Phi;u,v) + b_h(v,p) + ct_h(v;Psi,B) = (f, v_o)
// Mass row (test q):    -b_h(u,q) + lambda (q_o, 1) = 0
// Induction row (test w): at_h(B,w) + bt_h(w,r) = Rm^-1 (g,w_o) + ct_h(Phi;Psi,w)
// Gauge row (test th):  -bt_h(B,th) = 0
// Multiplier row:        (p_o, 1) = 0
// with Phi = u_prev, Psi = B_prev frozen from the previous iterate.

#pragma once

#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/Sparse>

#include "mhdwg/dofmap.hpp"
#include "mhdwg/fields.hpp"
#include "mhdwg/forms.hpp"
#include "mhdwg/mesh.hpp"
#include "mhdwg/weakops.hpp"

namespace mhdwg {

using SpMat = Eigen::SparseMatrix<double>;

// Prescribed coefficients for the eliminated boundary-trace dofs.
struct BoundaryLift {
  std::vector<Eigen::VectorXd> u_x, u_y;  // per boundary edge, else empty
  std::vector<Eigen::VectorXd> B_t;       // tangential component coefficients
  std::vector<Eigen::VectorXd> r;

  static BoundaryLift zero(const Mesh& mesh, int k) {
    BoundaryLift L;
    int nb = k + 1;
    L.u_x.assign(mesh.num_edges(), Eigen::VectorXd());
    L.u_y = L.u_x;
    L.B_t = L.u_x;
    L.r = L.u_x;
    for (int e = 0; e < mesh.num_edges(); ++e)
      if (mesh.edge(e).boundary) {
        L.u_x[e] = Eigen::VectorXd::Zero(nb);
        L.u_y[e] = Eigen::VectorXd::Zero(nb);
        L.B_t[e] = Eigen::VectorXd::Zero(nb);
        L.r[e] = Eigen::VectorXd::Zero(nb);
      }
    return L;
  }

  // L2-project boundary data onto the trace spaces.
  static BoundaryLift project(const Mesh& mesh, int k,
                              const std::function<Vec2(Vec2)>& u_bc,
                              const std::function<Vec2(Vec2)>& B_bc,
                              const std::function<double(Vec2)>& r_bc, int qdeg = 20) {
    BoundaryLift L = zero(mesh, k);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (!mesh.edge(e).boundary) continue;
      const Edge& ed = mesh.edge(e);
      if (u_bc) {
        L.u_x[e] = l2_project_edge(mesh, e, [&](Vec2 p) { return u_bc(p).x(); }, k, qdeg);
        L.u_y[e] = l2_project_edge(mesh, e, [&](Vec2 p) { return u_bc(p).y(); }, k, qdeg);
      }
      if (B_bc)
        L.B_t[e] =
            l2_project_edge(mesh, e, [&](Vec2 p) { return B_bc(p).dot(ed.tangent); }, k, qdeg);
      if (r_bc) L.r[e] = l2_project_edge(mesh, e, r_bc, k, qdeg);
    }
    return L;
  }
};

struct SparseSystem {
  SpMat A;
  Eigen::VectorXd b;
  Space space = Space::All;
};

// Per-element free system after applying the constraint transform.
struct ElementFreeSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lam;         // multiplier coupling per free dof
  std::vector<int> gdofs;      // indices in the chosen space
  std::vector<char> interior;  // 1 for interior dofs
};

struct ElementRecovery {
  Eigen::PartialPivLU<Eigen::MatrixXd> luII;
  Eigen::MatrixXd A_IT, A_TI;
  Eigen::VectorXd c_I;
  Eigen::VectorXd b_I;
  std::vector<int> int_g;  // global (space) indices of interior frees
  std::vector<int> tr_g;   // trace-system indices of trace frees
};

struct CondensedSystem {
  SpMat A;           // (n_trace + has_lambda) square
  Eigen::VectorXd b;
  std::vector<ElementRecovery> rec;
  int n_interior = 0, n_trace = 0, space_total = 0;
  bool has_lambda = false;
  Space space = Space::All;

  // trace solution -> full space vector (interior dofs recovered elementwise)
  Eigen::VectorXd expand(const Eigen::VectorXd& t) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(space_total);
    for (int i = 0; i < n_trace; ++i) x[n_interior + i] = t[i];
    double lambda = has_lambda ? t[n_trace] : 0.0;
    if (has_lambda) x[space_total - 1] = lambda;
    for (const auto& r : rec) {
      Eigen::VectorXd tloc(r.tr_g.size());
      for (std::size_t i = 0; i < r.tr_g.size(); ++i) tloc[i] = t[r.tr_g[i]];
      Eigen::VectorXd xI = r.luII.solve(r.b_I - r.A_IT * tloc - r.c_I * lambda);
      for (std::size_t i = 0; i < r.int_g.size(); ++i) x[r.int_g[i]] = xI[i];
    }
    return x;
  }
};

class OseenAssembler {
public:
  OseenAssembler(const FormContext& ctx, const DofMap& dofs, const BoundaryLift& lift,
                 std::function<Vec2(Vec2)> f, std::function<Vec2(Vec2)> g,
                 int data_quadrature = 0)
      : ctx_(&ctx), dofs_(&dofs), lift_(&lift) {
    const Mesh& mesh = ctx.mesh();
    const int k = ctx.k();
    nv_ = ctx.n_local_vector();
    np_ = ctx.n_local_pressure();
    no_ = ctx.n_interior_scalar();
    npo_ = ctx.n_interior_pressure();
    nb_ = ctx.n_trace_scalar();
    ntot_ = 2 * nv_ + 2 * np_;

    int qdata = data_quadrature > 0 ? data_quadrature : std::max(3 * k + 2, 12);
    QuadratureRule ref = triangle_quadrature(qdata);
    f_mom_.assign(mesh.num_elements(), Eigen::VectorXd::Zero(2 * no_));
    g_mom_.assign(mesh.num_elements(), Eigen::VectorXd::Zero(2 * no_));
    const double Rminv = 1.0 / ctx.params().Rm;
    for (int K = 0; K < mesh.num_elements(); ++K) {
      if (!f && !g) continue;
      QuadratureRule rule = for_element(ref, mesh.geometry(K));
      TriBasis bk(mesh.geometry(K), k);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        Vec2 fv = f ? f(rule.points[q]) : Vec2::Zero();
        Vec2 gv = g ? g(rule.points[q]) : Vec2::Zero();
        for (int i = 0; i < no_; ++i) {
          double w = rule.weights[q] * bk.value(i, rule.points[q]);
          f_mom_[K][i] += w * fv.x();
          f_mom_[K][no_ + i] += w * fv.y();
          g_mom_[K][i] += Rminv * w * gv.x();
          g_mom_[K][no_ + i] += Rminv * w * gv.y();
        }
      }
    }
  }

  const DofMap& dofs() const { return *dofs_; }
  const FormContext& ctx() const { return *ctx_; }

  // Element system in the chosen space. For Space::Momentum, B_known supplies
  // the already-solved magnetic field whose coupling moves to the right-hand
  // side. States may be null for a zero previous iterate.
  ElementFreeSystem element_system(int K, Space sp, const WGVectorField* u_prev,
                                   const WGVectorField* B_prev,
                                   const WGVectorField* B_known) const {
    const FormContext& ctx = *ctx_;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ntot_, ntot_);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ntot_);
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(ntot_);

    const int ou = 0, op = nv_, oB = nv_ + np_, oR = nv_ + np_ + nv_;

    FormContext::StateTables phi, psi;
    bool have_phi = false, have_psi = false;
    if (u_prev) {
      phi = ctx.state_tables(K, *u_prev);
      have_phi = true;
    }
    if (B_prev) {
      psi = ctx.state_tables(K, *B_prev);
      have_psi = true;
    }

    if (sp != Space::Magnetic) {
      A.block(ou, ou, nv_, nv_) = ctx.local_a_matrix(K);
      if (have_phi) A.block(ou, ou, nv_, nv_) += ctx.local_c_matrix(K, phi);
      const Eigen::MatrixXd& Bvq = ctx.local_b_matrix(K);
      A.block(ou, op, nv_, np_) = Bvq;
      A.block(op, ou, np_, nv_) = -Bvq.transpose();
      b.segment(ou, 2 * no_) = f_mom_[K];
      lam.segment(op, npo_) = ctx.cache(K).ones_km1;
      if (have_psi) A.block(ou, oB, nv_, nv_) = ctx.local_ctilde_matrix(K, psi);
    }
    if (sp != Space::Momentum) {
      A.block(oB, oB, nv_, nv_) = ctx.local_atilde_matrix(K);
      Eigen::MatrixXd Btr = ctx.local_btilde_matrix(K);
      A.block(oB, oR, nv_, np_) = Btr;
      A.block(oR, oB, np_, nv_) = -Btr.transpose();
      b.segment(oB, 2 * no_) = g_mom_[K];
      if (have_phi && have_psi)
        b.segment(oB, nv_) += ctx.local_ctilde_rhs(K, phi, psi);
    } else if (have_psi && B_known) {
      // coupling ct_h(v; B_prev, B_new) with B_new known moves to the rhs
      Eigen::MatrixXd AuB = ctx.local_ctilde_matrix(K, psi);
      b.segment(ou, nv_) -= AuB * B_known->local_dofs(K);
    }

    return constrain(K, sp, A, b, lam);
  }

  SparseSystem assemble(Space sp, const WGVectorField* u_prev, const WGVectorField* B_prev,
                        const WGVectorField* B_known = nullptr) const {
    const Mesh& mesh = ctx_->mesh();
    int n = dofs_->total(sp);
    int lam_g = dofs_->lambda_index(sp);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int K = 0; K < mesh.num_elements(); ++K) {
      ElementFreeSystem es = element_system(K, sp, u_prev, B_prev, B_known);
      int m = static_cast<int>(es.gdofs.size());
      for (int i = 0; i < m; ++i) {
        rhs[es.gdofs[i]] += es.b[i];
        for (int j = 0; j < m; ++j)
          if (es.A(i, j) != 0.0) trip.emplace_back(es.gdofs[i], es.gdofs[j], es.A(i, j));
        if (lam_g >= 0 && es.lam[i] != 0.0) {
          trip.emplace_back(es.gdofs[i], lam_g, es.lam[i]);
          trip.emplace_back(lam_g, es.gdofs[i], es.lam[i]);
        }
      }
    }
    if (lam_g >= 0) trip.emplace_back(lam_g, lam_g, 0.0);
    SparseSystem sys;
    sys.space = sp;
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trip.begin(), trip.end());
    sys.A.makeCompressed();
    sys.b = std::move(rhs);
    return sys;
  }

  CondensedSystem assemble_condensed(Space sp, const WGVectorField* u_prev,
                                     const WGVectorField* B_prev,
                                     const WGVectorField* B_known = nullptr) const {
    const Mesh& mesh = ctx_->mesh();
    CondensedSystem cs;
    cs.space = sp;
    cs.space_total = dofs_->total(sp);
    cs.n_interior = dofs_->n_interior(sp);
    cs.has_lambda = dofs_->lambda_index(sp) >= 0;
    cs.n_trace = dofs_->n_trace(sp);
    const int nt = cs.n_trace + (cs.has_lambda ? 1 : 0);
    const int lam_t = cs.n_trace;

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nt);
    cs.rec.reserve(mesh.num_elements());

    for (int K = 0; K < mesh.num_elements(); ++K) {
      ElementFreeSystem es = element_system(K, sp, u_prev, B_prev, B_known);
      int m = static_cast<int>(es.gdofs.size());
      std::vector<int> iloc, tloc;
      for (int i = 0; i < m; ++i) (es.interior[i] ? iloc : tloc).push_back(i);
      int nI = static_cast<int>(iloc.size()), nT = static_cast<int>(tloc.size());

      ElementRecovery r;
      Eigen::MatrixXd A_II(nI, nI);
      r.A_IT.resize(nI, nT);
      r.A_TI.resize(nT, nI);
      Eigen::MatrixXd A_TT(nT, nT);
      r.b_I.resize(nI);
      r.c_I.resize(nI);
      Eigen::VectorXd b_T(nT), c_T(nT);
      r.int_g.resize(nI);
      r.tr_g.resize(nT);
      for (int a = 0; a < nI; ++a) {
        r.int_g[a] = es.gdofs[iloc[a]];
        r.b_I[a] = es.b[iloc[a]];
        r.c_I[a] = es.lam[iloc[a]];
        for (int bb = 0; bb < nI; ++bb) A_II(a, bb) = es.A(iloc[a], iloc[bb]);
        for (int bb = 0; bb < nT; ++bb) r.A_IT(a, bb) = es.A(iloc[a], tloc[bb]);
      }
      for (int a = 0; a < nT; ++a) {
        r.tr_g[a] = es.gdofs[tloc[a]] - cs.n_interior;
        b_T[a] = es.b[tloc[a]];
        c_T[a] = es.lam[tloc[a]];  // zero by construction, kept for generality
        for (int bb = 0; bb < nI; ++bb) r.A_TI(a, bb) = es.A(tloc[a], iloc[bb]);
        for (int bb = 0; bb < nT; ++bb) A_TT(a, bb) = es.A(tloc[a], tloc[bb]);
      }

      r.luII.compute(A_II);
      Eigen::VectorXd diag = r.luII.matrixLU().diagonal().cwiseAbs();
      if (diag.minCoeff() <= 1e-14 * diag.maxCoeff())
        throw std::runtime_error("condense: singular interior block on element " +
                                 std::to_string(K));

      Eigen::MatrixXd R_T = r.luII.solve(r.A_IT);        // L^-1 A_IT
      Eigen::VectorXd r0 = r.luII.solve(r.b_I);          // L^-1 b_I
      Eigen::VectorXd rc = r.luII.solve(r.c_I);          // L^-1 c_I

      Eigen::MatrixXd S = A_TT - r.A_TI * R_T;
      Eigen::VectorXd bS = b_T - r.A_TI * r0;
      for (int a = 0; a < nT; ++a) {
        rhs[r.tr_g[a]] += bS[a];
        for (int bb = 0; bb < nT; ++bb)
          if (S(a, bb) != 0.0) trip.emplace_back(r.tr_g[a], r.tr_g[bb], S(a, bb));
      }
      if (cs.has_lambda) {
        Eigen::VectorXd colL = c_T - r.A_TI * rc;  // lambda column on trace rows
        Eigen::VectorXd rowL = c_T - R_T.transpose() * r.c_I;
        for (int a = 0; a < nT; ++a) {
          if (colL[a] != 0.0) trip.emplace_back(r.tr_g[a], lam_t, colL[a]);
          if (rowL[a] != 0.0) trip.emplace_back(lam_t, r.tr_g[a], rowL[a]);
        }
        double dl = -r.c_I.dot(rc);
        if (dl != 0.0) trip.emplace_back(lam_t, lam_t, dl);
        rhs[lam_t] -= r.c_I.dot(r0);
      }
      cs.rec.push_back(std::move(r));
    }
    if (cs.has_lambda) trip.emplace_back(lam_t, lam_t, 0.0);

    cs.A.resize(nt, nt);
    cs.A.setFromTriplets(trip.begin(), trip.end());
    cs.A.makeCompressed();
    cs.b = std::move(rhs);
    return cs;
  }

  // Coordinate-format text dump (row, col, value per line) for inspection.
  static void dump_matrix(const SpMat& A, std::ostream& os) {
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it)
        os << it.row() << " " << it.col() << " " << it.value() << "\n";
  }

private:
  // apply boundary constraints: x_full = T x_free + fixed
  ElementFreeSystem constrain(int K, Space sp, const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& b, const Eigen::VectorXd& lam) const {
    const Mesh& mesh = ctx_->mesh();
    const DofMap& d = *dofs_;

    // enumerate the in-space portion of the combined local layout
    std::vector<int> rows;  // full-layout indices in this space
    rows.reserve(ntot_);
    const int ou = 0, op = nv_, oB = nv_ + np_, oR = nv_ + np_ + nv_;

    struct Col {
      int gdof;
      bool interior;
    };
    std::vector<Col> cols;
    std::vector<Eigen::Triplet<double>> Ttrip;  // (full-layout row, free col, value)
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(ntot_);

    // The scheme is insensitive to the normal components of the magnetic
    // traces (weak curl, tangential stabilizer and bt_h all act on tangential
    // parts only), so those directions carry no equations. A gauge block pins
    // them to zero without perturbing the physical unknowns.
    struct BGauge {
      int col_x, col_y;  // free columns of one trace mode; col_y < 0 on the boundary
      Vec2 n;
    };
    std::vector<BGauge> gauges;

    auto add_identity = [&](int base_full, int base_g, int count, bool interior) {
      for (int j = 0; j < count; ++j) {
        Ttrip.emplace_back(base_full + j, static_cast<int>(cols.size()), 1.0);
        cols.push_back({base_g + j, interior});
        rows.push_back(base_full + j);
      }
    };
    auto add_rows_only = [&](int base_full, int count) {
      for (int j = 0; j < count; ++j) rows.push_back(base_full + j);
    };

    if (sp != Space::Magnetic) {
      // u interior + traces
      add_identity(ou, d.u_interior(K, sp), 2 * no_, true);
      for (int l = 0; l < 3; ++l) {
        int e = mesh.element_edge(K, l);
        int base = ou + 2 * no_ + l * 2 * nb_;
        if (!mesh.edge(e).boundary) {
          add_identity(base, d.u_trace(e, sp), 2 * nb_, false);
        } else {
          fixed.segment(base, nb_) = lift_->u_x[e];
          fixed.segment(base + nb_, nb_) = lift_->u_y[e];
          add_rows_only(base, 2 * nb_);
        }
      }
      // p interior + traces (all free)
      add_identity(op, d.p_interior(K, sp), npo_, true);
      for (int l = 0; l < 3; ++l) {
        int e = mesh.element_edge(K, l);
        add_identity(op + npo_ + l * nb_, d.p_trace(e, sp), nb_, false);
      }
    }
    if (sp != Space::Momentum) {
      add_identity(oB, d.B_interior(K, sp), 2 * no_, true);
      for (int l = 0; l < 3; ++l) {
        int e = mesh.element_edge(K, l);
        int base = oB + 2 * no_ + l * 2 * nb_;
        if (!mesh.edge(e).boundary) {
          int first = static_cast<int>(cols.size());
          add_identity(base, d.B_trace(e, sp), 2 * nb_, false);
          for (int j = 0; j < nb_; ++j)
            gauges.push_back({first + j, first + nb_ + j, mesh.edge(e).normal});
        } else {
          // full (x,y) coefficients = a_j n + b_j t with a free, b prescribed
          const Edge& ed = mesh.edge(e);
          int gb = d.B_trace(e, sp);
          for (int j = 0; j < nb_; ++j) {
            int col = static_cast<int>(cols.size());
            Ttrip.emplace_back(base + j, col, ed.normal.x());
            Ttrip.emplace_back(base + nb_ + j, col, ed.normal.y());
            cols.push_back({gb + j, false});
            gauges.push_back({col, -1, ed.normal});
          }
          for (int j = 0; j < nb_; ++j) {
            fixed[base + j] = ed.tangent.x() * lift_->B_t[e][j];
            fixed[base + nb_ + j] = ed.tangent.y() * lift_->B_t[e][j];
          }
          add_rows_only(base, 2 * nb_);
        }
      }
      add_identity(oR, d.r_interior(K, sp), npo_, true);
      for (int l = 0; l < 3; ++l) {
        int e = mesh.element_edge(K, l);
        int base = oR + npo_ + l * nb_;
        if (!mesh.edge(e).boundary) {
          add_identity(base, d.r_trace(e, sp), nb_, false);
        } else {
          fixed.segment(base, nb_) = lift_->r[e];
          add_rows_only(base, nb_);
        }
      }
    }

    int nfree = static_cast<int>(cols.size());
    int nrows = static_cast<int>(rows.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(ntot_, nfree);
    for (const auto& t : Ttrip) T(t.row(), t.col()) = t.value();

    // restrict rows to the in-space portion
    Eigen::MatrixXd Ain(nrows, ntot_);
    Eigen::VectorXd bin(nrows), lamin(nrows);
    for (int i = 0; i < nrows; ++i) {
      Ain.row(i) = A.row(rows[i]);
      bin[i] = b[rows[i]];
      lamin[i] = lam[rows[i]];
    }
    Eigen::MatrixXd Tin(nrows, nfree);
    for (int i = 0; i < nrows; ++i) Tin.row(i) = T.row(rows[i]);

    ElementFreeSystem es;
    es.A = Tin.transpose() * (Ain * T);
    es.b = Tin.transpose() * (bin - Ain * fixed);
    es.lam = Tin.transpose() * lamin;
    es.gdofs.resize(nfree);
    es.interior.resize(nfree);
    for (int j = 0; j < nfree; ++j) {
      es.gdofs[j] = cols[j].gdof;
      es.interior[j] = cols[j].interior ? 1 : 0;
    }
    const double alpha = 1.0 / (ctx_->params().Rm * ctx_->params().Rm);
    for (const auto& gzz : gauges) {
      if (gzz.col_y < 0) {
        es.A(gzz.col_x, gzz.col_x) += alpha;
      } else {
        es.A(gzz.col_x, gzz.col_x) += alpha * gzz.n.x() * gzz.n.x();
        es.A(gzz.col_x, gzz.col_y) += alpha * gzz.n.x() * gzz.n.y();
        es.A(gzz.col_y, gzz.col_x) += alpha * gzz.n.y() * gzz.n.x();
        es.A(gzz.col_y, gzz.col_y) += alpha * gzz.n.y() * gzz.n.y();
      }
    }
    return es;
  }

  const FormContext* ctx_;
  const DofMap* dofs_;
  const BoundaryLift* lift_;
  int nv_ = 0, np_ = 0, no_ = 0, npo_ = 0, nb_ = 0, ntot_ = 0;
  std::vector<Eigen::VectorXd> f_mom_, g_mom_;
};

// fields -> dof vector of free unknowns (lift values are not represented)
inline Eigen::VectorXd flatten_fields(const DofMap& d, Space sp, const WGVectorField* u,
                                      const WGScalarField* p, const WGVectorField* B,
                                      const WGScalarField* r, double lambda = 0.0) {
  const Mesh& mesh = d.mesh();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d.total(sp));
  int no = d.n_interior_scalar(), npo = d.n_interior_pressure(), nb = d.n_trace_scalar();
  for (int K = 0; K < mesh.num_elements(); ++K) {
    if (sp != Space::Magnetic && u) {
      x.segment(d.u_interior(K, sp), no) = u->component(0).interior(K);
      x.segment(d.u_interior(K, sp) + no, no) = u->component(1).interior(K);
    }
    if (sp != Space::Magnetic && p) x.segment(d.p_interior(K, sp), npo) = p->interior(K);
    if (sp != Space::Momentum && B) {
      x.segment(d.B_interior(K, sp), no) = B->component(0).interior(K);
      x.segment(d.B_interior(K, sp) + no, no) = B->component(1).interior(K);
    }
    if (sp != Space::Momentum && r) x.segment(d.r_interior(K, sp), npo) = r->interior(K);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    bool bnd = mesh.edge(e).boundary;
    if (sp != Space::Magnetic && u && !bnd) {
      x.segment(d.u_trace(e, sp), nb) = u->component(0).trace(e);
      x.segment(d.u_trace(e, sp) + nb, nb) = u->component(1).trace(e);
    }
    if (sp != Space::Magnetic && p) x.segment(d.p_trace(e, sp), nb) = p->trace(e);
    if (sp != Space::Momentum && B) {
      if (!bnd) {
        x.segment(d.B_trace(e, sp), nb) = B->component(0).trace(e);
        x.segment(d.B_trace(e, sp) + nb, nb) = B->component(1).trace(e);
      } else {
        // free part is the normal component
        const Edge& ed = mesh.edge(e);
        x.segment(d.B_trace(e, sp), nb) = ed.normal.x() * B->component(0).trace(e) +
                                          ed.normal.y() * B->component(1).trace(e);
      }
    }
    if (sp != Space::Momentum && r && !bnd) x.segment(d.r_trace(e, sp), nb) = r->trace(e);
  }
  if (d.lambda_index(sp) >= 0) x[d.lambda_index(sp)] = lambda;
  return x;
}

// dof vector -> fields; eliminated dofs take their lift values
inline void extract_fields(const DofMap& d, const BoundaryLift& lift, Space sp,
                           const Eigen::VectorXd& x, WGVectorField* u, WGScalarField* p,
                           WGVectorField* B, WGScalarField* r, double* lambda = nullptr) {
  const Mesh& mesh = d.mesh();
  int no = d.n_interior_scalar(), npo = d.n_interior_pressure(), nb = d.n_trace_scalar();
  for (int K = 0; K < mesh.num_elements(); ++K) {
    if (sp != Space::Magnetic && u) {
      u->component(0).interior(K) = x.segment(d.u_interior(K, sp), no);
      u->component(1).interior(K) = x.segment(d.u_interior(K, sp) + no, no);
    }
    if (sp != Space::Magnetic && p) p->interior(K) = x.segment(d.p_interior(K, sp), npo);
    if (sp != Space::Momentum && B) {
      B->component(0).interior(K) = x.segment(d.B_interior(K, sp), no);
      B->component(1).interior(K) = x.segment(d.B_interior(K, sp) + no, no);
    }
    if (sp != Space::Momentum && r) r->interior(K) = x.segment(d.r_interior(K, sp), npo);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    bool bnd = mesh.edge(e).boundary;
    const Edge& ed = mesh.edge(e);
    if (sp != Space::Magnetic && u) {
      if (!bnd) {
        u->component(0).trace(e) = x.segment(d.u_trace(e, sp), nb);
        u->component(1).trace(e) = x.segment(d.u_trace(e, sp) + nb, nb);
      } else {
        u->component(0).trace(e) = lift.u_x[e];
        u->component(1).trace(e) = lift.u_y[e];
      }
    }
    if (sp != Space::Magnetic && p) p->trace(e) = x.segment(d.p_trace(e, sp), nb);
    if (sp != Space::Momentum && B) {
      if (!bnd) {
        B->component(0).trace(e) = x.segment(d.B_trace(e, sp), nb);
        B->component(1).trace(e) = x.segment(d.B_trace(e, sp) + nb, nb);
      } else {
        Eigen::VectorXd a = x.segment(d.B_trace(e, sp), nb);
        B->component(0).trace(e) = ed.normal.x() * a + ed.tangent.x() * lift.B_t[e];
        B->component(1).trace(e) = ed.normal.y() * a + ed.tangent.y() * lift.B_t[e];
      }
    }
    if (sp != Space::Momentum && r) {
      if (!bnd)
        r->trace(e) = x.segment(d.r_trace(e, sp), nb);
      else
        r->trace(e) = lift.r[e];
    }
  }
  if (lambda && d.lambda_index(sp) >= 0) *lambda = x[d.lambda_index(sp)];
}

}  // namespace mhdwg
