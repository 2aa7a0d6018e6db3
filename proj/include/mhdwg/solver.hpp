// Nonlinear driver: Oseen iteration from a zero initial guess down to the
// increment stopping criterion ||u_o^n - u_o^{n-1}||_0 < tol, with the
// coupled one-shot step as the default and a decoupled (magnetic block first,
// then momentum) variant as a flag. Either path can run fully assembled or
// statically condensed.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <vector>

#include "mhdwg/assembly.hpp"
#include "mhdwg/dofmap.hpp"
#include "mhdwg/fields.hpp"
#include "mhdwg/forms.hpp"
#include "mhdwg/manufactured.hpp"
#include "mhdwg/mesh.hpp"
#include "mhdwg/solve.hpp"

namespace mhdwg {

struct SolverConfig {
  int n = 4;                    // structured mesh subdivisions
  PhysicalParams params{};      // includes the order k
  int example = 0;              // 1 or 2 selects a manufactured case; 0 = custom
  std::function<Vec2(Vec2)> f, g;
  std::function<Vec2(Vec2)> u_bc, B_bc;   // boundary data (defaults: homogeneous)
  std::function<double(Vec2)> r_bc;
  double tol = 1e-8;
  int max_iterations = 100;
  bool condense = true;
  bool decoupled = false;
  int data_quadrature = 0;      // 0 = default
};

struct SolutionFields {
  WGVectorField u, B;
  WGScalarField p, r;
  double lambda = 0.0;       // pressure-mean multiplier (zero at convergence)
  int iterations = 0;
  std::vector<double> increments;  // ||u_o^n - u_o^{n-1}||_0 per iteration
  double final_residual = 0.0;     // linear-solve residual of the last step
};

struct NonConvergence : std::runtime_error {
  std::vector<double> increments;
  NonConvergence(const std::string& msg, std::vector<double> inc)
      : std::runtime_error(msg), increments(std::move(inc)) {}
};

namespace detail {

inline double interior_l2_increment(const FormContext& ctx, const WGVectorField& a,
                                    const WGVectorField& b) {
  double s = 0;
  for (int K = 0; K < ctx.mesh().num_elements(); ++K) {
    const auto& c = ctx.cache(K);
    for (int comp = 0; comp < 2; ++comp) {
      Eigen::VectorXd d = a.component(comp).interior(K) - b.component(comp).interior(K);
      s += d.dot(c.Mk * d);
    }
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace detail

// One Oseen step solved in the requested mode; returns the full coupled-space
// coefficient vector (Space::All layout) for diagnostics, and fills fields.
class OseenStepper {
public:
  OseenStepper(const FormContext& ctx, const DofMap& dofs, const BoundaryLift& lift,
               const SolverConfig& cfg)
      : ctx_(&ctx), dofs_(&dofs), lift_(&lift), cfg_(&cfg),
        assembler_(ctx, dofs, lift, cfg.f, cfg.g, cfg.data_quadrature) {}

  const OseenAssembler& assembler() const { return assembler_; }

  // Solves one linearized step at state (u_prev, B_prev) into the out fields.
  // Returns the relative residual of the linear solve(s).
  double step(const WGVectorField& u_prev, const WGVectorField& B_prev, WGVectorField& u,
              WGScalarField& p, WGVectorField& B, WGScalarField& r, double& lambda) {
    if (!cfg_->decoupled) return coupled_step(u_prev, B_prev, u, p, B, r, lambda);
    return decoupled_step(u_prev, B_prev, u, p, B, r, lambda);
  }

private:
  double coupled_step(const WGVectorField& u_prev, const WGVectorField& B_prev,
                      WGVectorField& u, WGScalarField& p, WGVectorField& B, WGScalarField& r,
                      double& lambda) {
    double resid;
    Eigen::VectorXd x;
    if (cfg_->condense) {
      CondensedSystem cs = assembler_.assemble_condensed(Space::All, &u_prev, &B_prev);
      lu_all_.factorize(cs.A);
      Eigen::VectorXd t = lu_all_.solve(cs.b);
      resid = relative_residual(cs.A, t, cs.b);
      x = cs.expand(t);
    } else {
      SparseSystem sys = assembler_.assemble(Space::All, &u_prev, &B_prev);
      lu_all_.factorize(sys.A);
      x = lu_all_.solve(sys.b);
      resid = relative_residual(sys.A, x, sys.b);
    }
    extract_fields(*dofs_, *lift_, Space::All, x, &u, &p, &B, &r, &lambda);
    return resid;
  }

  double decoupled_step(const WGVectorField& u_prev, const WGVectorField& B_prev,
                        WGVectorField& u, WGScalarField& p, WGVectorField& B, WGScalarField& r,
                        double& lambda) {
    double resid_mag, resid_mom;
    // magnetic block: constant matrix, state-dependent right-hand side
    if (cfg_->condense) {
      CondensedSystem cs = assembler_.assemble_condensed(Space::Magnetic, &u_prev, &B_prev);
      if (!mag_factorized_) {
        lu_mag_.factorize(cs.A);
        mag_factorized_ = true;
      }
      Eigen::VectorXd t = lu_mag_.solve(cs.b);
      resid_mag = relative_residual(cs.A, t, cs.b);
      extract_fields(*dofs_, *lift_, Space::Magnetic, cs.expand(t), nullptr, nullptr, &B, &r);
    } else {
      SparseSystem sys = assembler_.assemble(Space::Magnetic, &u_prev, &B_prev);
      if (!mag_factorized_) {
        lu_mag_.factorize(sys.A);
        mag_factorized_ = true;
      }
      Eigen::VectorXd x = lu_mag_.solve(sys.b);
      resid_mag = relative_residual(sys.A, x, sys.b);
      extract_fields(*dofs_, *lift_, Space::Magnetic, x, nullptr, nullptr, &B, &r);
    }
    // momentum block with the fresh magnetic field on the right-hand side
    if (cfg_->condense) {
      CondensedSystem cs = assembler_.assemble_condensed(Space::Momentum, &u_prev, &B_prev, &B);
      lu_mom_.factorize(cs.A);
      Eigen::VectorXd t = lu_mom_.solve(cs.b);
      resid_mom = relative_residual(cs.A, t, cs.b);
      extract_fields(*dofs_, *lift_, Space::Momentum, cs.expand(t), &u, &p, nullptr, nullptr,
                     &lambda);
    } else {
      SparseSystem sys = assembler_.assemble(Space::Momentum, &u_prev, &B_prev, &B);
      lu_mom_.factorize(sys.A);
      Eigen::VectorXd x = lu_mom_.solve(sys.b);
      resid_mom = relative_residual(sys.A, x, sys.b);
      extract_fields(*dofs_, *lift_, Space::Momentum, x, &u, &p, nullptr, nullptr, &lambda);
    }
    return std::max(resid_mag, resid_mom);
  }

  const FormContext* ctx_;
  const DofMap* dofs_;
  const BoundaryLift* lift_;
  const SolverConfig* cfg_;
  OseenAssembler assembler_;
  LinearSolver lu_all_, lu_mag_, lu_mom_;
  bool mag_factorized_ = false;
};

// Oseen iteration on a prebuilt context. States start from zero fields.
inline SolutionFields solve_mhd(const FormContext& ctx, const DofMap& dofs,
                                const BoundaryLift& lift, const SolverConfig& cfg) {
  if (cfg.tol <= 0) throw std::invalid_argument("solve_mhd: tolerance must be positive");
  if (cfg.max_iterations < 1) throw std::invalid_argument("solve_mhd: max_iterations >= 1");
  const Mesh& mesh = ctx.mesh();
  const int k = ctx.k();

  OseenStepper stepper(ctx, dofs, lift, cfg);

  SolutionFields out{WGVectorField(mesh, k, k), WGVectorField(mesh, k, k),
                     WGScalarField(mesh, k - 1, k), WGScalarField(mesh, k - 1, k)};
  WGVectorField u_prev(mesh, k, k), B_prev(mesh, k, k);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    out.final_residual = stepper.step(u_prev, B_prev, out.u, out.p, out.B, out.r, out.lambda);
    double inc = detail::interior_l2_increment(ctx, out.u, u_prev);
    out.increments.push_back(inc);
    out.iterations = it;
    if (inc < cfg.tol) return out;
    u_prev = out.u;
    B_prev = out.B;
  }
  std::ostringstream msg;
  msg << "Oseen iteration did not converge in " << cfg.max_iterations
      << " iterations; last increment " << out.increments.back();
  throw NonConvergence(msg.str(), out.increments);
}

// Convenience entry point owning the mesh and caches.
struct MHDRun {
  std::shared_ptr<Mesh> mesh;
  std::shared_ptr<FormContext> ctx;
  std::shared_ptr<DofMap> dofs;
  std::shared_ptr<BoundaryLift> lift;
  SolutionFields fields;
};

inline MHDRun run_mhd(SolverConfig cfg) {
  MHDRun run;
  run.mesh = std::make_shared<Mesh>(build_structured_mesh(cfg.n));
  if (cfg.example != 0) {
    ManufacturedCase mc = manufactured_case(cfg.example, cfg.params);
    cfg.f = mc.f;
    cfg.g = mc.g;
    cfg.u_bc = mc.u;
    cfg.B_bc = mc.B;
    cfg.r_bc = mc.r;
  }
  run.ctx = std::make_shared<FormContext>(*run.mesh, cfg.params);
  run.dofs = std::make_shared<DofMap>(*run.mesh, cfg.params.k);
  run.lift = std::make_shared<BoundaryLift>(
      cfg.u_bc || cfg.B_bc || cfg.r_bc
          ? BoundaryLift::project(*run.mesh, cfg.params.k, cfg.u_bc, cfg.B_bc, cfg.r_bc)
          : BoundaryLift::zero(*run.mesh, cfg.params.k));
  run.fields = solve_mhd(*run.ctx, *run.dofs, *run.lift, cfg);
  return run;
}

// ---- divergence metrics ------------------------------------------------------

// (max_K h_K^-1 ||div u_o||_{0,K}, sqrt(sum over interior edges of the squared
// L2 norm of the normal jump)). The divergence is differentiated exactly from
// the polynomial coefficients.
inline std::pair<double, double> divergence_metrics(const WGVectorField& f) {
  const Mesh& mesh = f.mesh();
  const int k = f.interior_degree();
  double divmax = 0.0;
  for (int K = 0; K < mesh.num_elements(); ++K) {
    const auto& g = mesh.geometry(K);
    TriBasis bk(g, k), bkm1(g, k - 1);
    Eigen::MatrixXd Dx = dx_matrix(bk, bkm1), Dy = dy_matrix(bk, bkm1);
    Eigen::VectorXd div =
        Dx * f.component(0).interior(K) + Dy * f.component(1).interior(K);
    QuadratureRule rule = for_element(triangle_quadrature(std::max(1, 2 * (k - 1))), g);
    double l2 = 0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      double v = 0;
      for (int i = 0; i < bkm1.dim(); ++i) v += div[i] * bkm1.value(i, rule.points[q]);
      l2 += rule.weights[q] * v * v;
    }
    divmax = std::max(divmax, std::sqrt(std::max(0.0, l2)) / g.diameter);
  }

  double jump2 = 0.0;
  EdgeRule eref = edge_quadrature(2 * k);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (ed.boundary) continue;
    QuadratureRule rule = for_edge(eref, ed, mesh);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vec2 a = f.eval_interior(ed.elem[0], rule.points[q]);
      Vec2 b = f.eval_interior(ed.elem[1], rule.points[q]);
      double jn = (a - b).dot(ed.normal);
      jump2 += rule.weights[q] * jn * jn;
    }
  }
  return {divmax, std::sqrt(jump2)};
}

// Residual vector of the nonlinear scheme at the given fields: assembles the
// coupled system with the trilinear terms frozen at the solution itself and
// returns A x - b restricted to each block (u, p, B, r rows).
struct SchemeResidual {
  double momentum = 0, mass = 0, induction = 0, gauge = 0, total = 0;
};

inline SchemeResidual scheme_residual(const OseenAssembler& assembler,
                                      const SolutionFields& sol) {
  const DofMap& d = assembler.dofs();
  SparseSystem sys = assembler.assemble(Space::All, &sol.u, &sol.B);
  Eigen::VectorXd x = flatten_fields(d, Space::All, &sol.u, &sol.p, &sol.B, &sol.r, sol.lambda);
  Eigen::VectorXd res = sys.A * x - sys.b;

  SchemeResidual out;
  const Mesh& mesh = d.mesh();
  int no = d.n_interior_scalar(), npo = d.n_interior_pressure(), nb = d.n_trace_scalar();
  auto acc = [&](double& slot, int off, int len) {
    for (int i = 0; i < len; ++i) slot += res[off + i] * res[off + i];
  };
  for (int K = 0; K < mesh.num_elements(); ++K) {
    acc(out.momentum, d.u_interior(K, Space::All), 2 * no);
    acc(out.mass, d.p_interior(K, Space::All), npo);
    acc(out.induction, d.B_interior(K, Space::All), 2 * no);
    acc(out.gauge, d.r_interior(K, Space::All), npo);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    bool bnd = mesh.edge(e).boundary;
    if (!bnd) acc(out.momentum, d.u_trace(e, Space::All), 2 * nb);
    acc(out.mass, d.p_trace(e, Space::All), nb);
    acc(out.induction, d.B_trace(e, Space::All), d.B_trace_size(e));
    if (!bnd) acc(out.gauge, d.r_trace(e, Space::All), nb);
  }
  acc(out.mass, d.lambda_index(Space::All), 1);
  out.momentum = std::sqrt(out.momentum);
  out.mass = std::sqrt(out.mass);
  out.induction = std::sqrt(out.induction);
  out.gauge = std::sqrt(out.gauge);
  out.total = res.norm();
  return out;
}

}  // namespace mhdwg
