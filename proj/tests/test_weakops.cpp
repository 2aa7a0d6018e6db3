#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mhdwg/fields.hpp"
#include "mhdwg/mesh.hpp"
#include "mhdwg/weakops.hpp"

using namespace mhdwg;

namespace {

// Independent dense oracle: assembles the defining moments by direct
// quadrature (collapsed tensor rules at elevated order, so a different rule
// family than the tabulated ones the operators use) and solves the local
// system with a rank-revealing QR. Shares no code path with the operators.
struct DenseOracle {
  const Mesh& mesh;
  int K;
  ElementGeometry g;

  DenseOracle(const Mesh& m, int Kk) : mesh(m), K(Kk), g(m.geometry(Kk)) {}

  Eigen::MatrixXd target_mass(int m, int qdeg) const {
    TriBasis bm(g, m);
    QuadratureRule r = for_element(triangle_quadrature(qdeg), g);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(bm.dim(), bm.dim());
    for (std::size_t q = 0; q < r.points.size(); ++q)
      for (int i = 0; i < bm.dim(); ++i)
        for (int j = 0; j < bm.dim(); ++j)
          M(i, j) += r.weights[q] * bm.value(i, r.points[q]) * bm.value(j, r.points[q]);
    return M;
  }

  // weak gradient of scalar dofs
  Eigen::VectorXd weak_gradient(const Eigen::VectorXd& loc, int deg_o, int deg_b, int m) const {
    TriBasis bo(g, deg_o), bm(g, m);
    int no = bo.dim(), nb = deg_b + 1, nm = bm.dim();
    QuadratureRule tri = for_element(triangle_quadrature(12), g);
    Eigen::VectorXd rx = Eigen::VectorXd::Zero(nm), ry = Eigen::VectorXd::Zero(nm);
    for (std::size_t q = 0; q < tri.points.size(); ++q) {
      double vo = 0;
      for (int i = 0; i < no; ++i) vo += loc[i] * bo.value(i, tri.points[q]);
      for (int i = 0; i < nm; ++i) {
        Vec2 gr = bm.grad(i, tri.points[q]);
        rx[i] -= tri.weights[q] * vo * gr.x();
        ry[i] -= tri.weights[q] * vo * gr.y();
      }
    }
    for (int l = 0; l < 3; ++l) {
      const Edge& e = mesh.edge(mesh.element_edge(K, l));
      EdgeBasis eb(e, deg_b);
      QuadratureRule er = for_edge(edge_quadrature(13), e, mesh);
      Vec2 n = g.outward_normal[l];
      for (std::size_t q = 0; q < er.points.size(); ++q) {
        double vb = 0;
        for (int j = 0; j < nb; ++j) vb += loc[no + l * nb + j] * eb.value(j, er.points[q]);
        for (int i = 0; i < nm; ++i) {
          double mi = bm.value(i, er.points[q]);
          rx[i] += er.weights[q] * vb * n.x() * mi;
          ry[i] += er.weights[q] * vb * n.y() * mi;
        }
      }
    }
    Eigen::MatrixXd M = target_mass(m, 11);
    Eigen::VectorXd out(2 * nm);
    out.head(nm) = M.colPivHouseholderQr().solve(rx);
    out.tail(nm) = M.colPivHouseholderQr().solve(ry);
    return out;
  }

  Eigen::VectorXd weak_divergence(const Eigen::VectorXd& loc, int deg_o, int deg_b, int m) const {
    TriBasis bo(g, deg_o), bm(g, m);
    int no = bo.dim(), nb = deg_b + 1, nm = bm.dim();
    QuadratureRule tri = for_element(triangle_quadrature(12), g);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nm);
    for (std::size_t q = 0; q < tri.points.size(); ++q) {
      Vec2 wo(0, 0);
      for (int i = 0; i < no; ++i) {
        wo.x() += loc[i] * bo.value(i, tri.points[q]);
        wo.y() += loc[no + i] * bo.value(i, tri.points[q]);
      }
      for (int i = 0; i < nm; ++i) r[i] -= tri.weights[q] * wo.dot(bm.grad(i, tri.points[q]));
    }
    for (int l = 0; l < 3; ++l) {
      const Edge& e = mesh.edge(mesh.element_edge(K, l));
      EdgeBasis eb(e, deg_b);
      QuadratureRule er = for_edge(edge_quadrature(13), e, mesh);
      Vec2 n = g.outward_normal[l];
      for (std::size_t q = 0; q < er.points.size(); ++q) {
        Vec2 wb(0, 0);
        for (int j = 0; j < nb; ++j) {
          wb.x() += loc[2 * no + l * 2 * nb + j] * eb.value(j, er.points[q]);
          wb.y() += loc[2 * no + l * 2 * nb + nb + j] * eb.value(j, er.points[q]);
        }
        for (int i = 0; i < nm; ++i)
          r[i] += er.weights[q] * wb.dot(n) * bm.value(i, er.points[q]);
      }
    }
    return target_mass(m, 11).colPivHouseholderQr().solve(r);
  }

  Eigen::VectorXd weak_curl(const Eigen::VectorXd& loc, int deg_o, int deg_b, int m) const {
    TriBasis bo(g, deg_o), bm(g, m);
    int no = bo.dim(), nb = deg_b + 1, nm = bm.dim();
    QuadratureRule tri = for_element(triangle_quadrature(12), g);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nm);
    for (std::size_t q = 0; q < tri.points.size(); ++q) {
      Vec2 wo(0, 0);
      for (int i = 0; i < no; ++i) {
        wo.x() += loc[i] * bo.value(i, tri.points[q]);
        wo.y() += loc[no + i] * bo.value(i, tri.points[q]);
      }
      for (int i = 0; i < nm; ++i) {
        Vec2 gr = bm.grad(i, tri.points[q]);
        // curl phi = (d_y phi, -d_x phi)
        r[i] += tri.weights[q] * (wo.x() * gr.y() - wo.y() * gr.x());
      }
    }
    for (int l = 0; l < 3; ++l) {
      const Edge& e = mesh.edge(mesh.element_edge(K, l));
      EdgeBasis eb(e, deg_b);
      QuadratureRule er = for_edge(edge_quadrature(13), e, mesh);
      Vec2 n = g.outward_normal[l];
      for (std::size_t q = 0; q < er.points.size(); ++q) {
        Vec2 wb(0, 0);
        for (int j = 0; j < nb; ++j) {
          wb.x() += loc[2 * no + l * 2 * nb + j] * eb.value(j, er.points[q]);
          wb.y() += loc[2 * no + l * 2 * nb + nb + j] * eb.value(j, er.points[q]);
        }
        for (int i = 0; i < nm; ++i)
          r[i] += er.weights[q] * cross2(n, wb) * bm.value(i, er.points[q]);
      }
    }
    return target_mass(m, 11).colPivHouseholderQr().solve(r);
  }
};

// WG interpolant dofs of a smooth scalar: interior Q^o_{deg_o}, traces Q^b_{deg_b}.
Eigen::VectorXd project_scalar_local(const Mesh& mesh, int K,
                                     const std::function<double(Vec2)>& f, int deg_o, int deg_b,
                                     int qdeg = 18) {
  int no = tri_space_dim(deg_o), nb = deg_b + 1;
  Eigen::VectorXd loc(no + 3 * nb);
  loc.head(no) = l2_project_interior(mesh, K, f, deg_o, qdeg);
  for (int l = 0; l < 3; ++l)
    loc.segment(no + l * nb, nb) = l2_project_edge(mesh, mesh.element_edge(K, l), f, deg_b, qdeg);
  return loc;
}

Eigen::VectorXd stack_vector_local(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int no,
                                   int nb) {
  Eigen::VectorXd loc(2 * no + 6 * nb);
  loc.segment(0, no) = x.head(no);
  loc.segment(no, no) = y.head(no);
  for (int l = 0; l < 3; ++l) {
    loc.segment(2 * no + l * 2 * nb, nb) = x.segment(no + l * nb, nb);
    loc.segment(2 * no + l * 2 * nb + nb, nb) = y.segment(no + l * nb, nb);
  }
  return loc;
}

double eval_poly(const TriBasis& b, const Eigen::VectorXd& c, const Vec2& p) {
  double v = 0;
  for (int i = 0; i < b.dim(); ++i) v += c[i] * b.value(i, p);
  return v;
}

}  // namespace

TEST_CASE("weak operators kill constants") {
  Mesh mesh = build_structured_mesh(3);
  for (int k : {1, 2}) {
    for (int K : {0, 5, 11}) {
      int no = tri_space_dim(k), nb = k + 1;
      // scalar constant {c, c}
      Eigen::VectorXd loc = Eigen::VectorXd::Zero(no + 3 * nb);
      loc[0] = 2.7;
      for (int l = 0; l < 3; ++l) loc[no + l * nb] = 2.7;
      auto G = weak_gradient_operator(mesh, K, k, k, k - 1);
      CHECK((G.matrix * loc).cwiseAbs().maxCoeff() < 1e-11);

      // vector constant
      Eigen::VectorXd vloc = Eigen::VectorXd::Zero(2 * no + 6 * nb);
      vloc[0] = 1.5;
      vloc[no] = -0.75;
      for (int l = 0; l < 3; ++l) {
        vloc[2 * no + l * 2 * nb] = 1.5;
        vloc[2 * no + l * 2 * nb + nb] = -0.75;
      }
      auto C = weak_curl_operator(mesh, K, k, k, k - 1);
      CHECK((C.matrix * vloc).cwiseAbs().maxCoeff() < 1e-11);

      // constant vector has zero weak divergence as well
      auto D = weak_divergence_operator(mesh, K, k, k, k);
      CHECK((D.matrix * vloc).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("weak gradient of projected linear field is its exact gradient") {
  Mesh mesh = build_structured_mesh(2);
  int k = 1;
  for (int K = 0; K < mesh.num_elements(); ++K) {
    auto q = [](Vec2 p) { return p.x(); };
    Eigen::VectorXd loc = project_scalar_local(mesh, K, q, k - 1, k);
    auto G = weak_gradient_operator(mesh, K, k - 1, k, k);
    Eigen::VectorXd out = G.matrix * loc;
    TriBasis bm(mesh.geometry(K), k);
    // x-component identically 1, y-component identically 0
    CHECK(eval_poly(bm, out.head(bm.dim()), mesh.geometry(K).centroid) == Catch::Approx(1.0));
    CHECK(out.head(bm.dim()).tail(bm.dim() - 1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(out.tail(bm.dim()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("weak divergence and curl reproduce exact values for linear fields") {
  Mesh mesh = build_structured_mesh(2);
  for (int k : {1, 2}) {
    for (int K : {0, 3, 7}) {
      // w = (x, y): divergence 2; w = (-y, x): curl 2
      auto fx = project_scalar_local(mesh, K, [](Vec2 p) { return p.x(); }, k, k);
      auto fy = project_scalar_local(mesh, K, [](Vec2 p) { return p.y(); }, k, k);
      int no = tri_space_dim(k), nb = k + 1;
      Eigen::VectorXd w1 = stack_vector_local(fx, fy, no, nb);

      auto D = weak_divergence_operator(mesh, K, k, k, k);
      Eigen::VectorXd div = D.matrix * w1;
      CHECK(div[0] == Catch::Approx(2.0).epsilon(1e-12));
      CHECK(div.tail(div.size() - 1).cwiseAbs().maxCoeff() < 1e-12);

      auto fmy = project_scalar_local(mesh, K, [](Vec2 p) { return -p.y(); }, k, k);
      Eigen::VectorXd w2 = stack_vector_local(fmy, fx, no, nb);
      auto C = weak_curl_operator(mesh, K, k, k, k - 1);
      Eigen::VectorXd curl = C.matrix * w2;
      CHECK(curl[0] == Catch::Approx(2.0).epsilon(1e-12));
      CHECK(curl.tail(curl.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("weak operators match the independent dense oracle") {
  Mesh mesh = build_structured_mesh(4);
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> unif(-1, 1);
  std::uniform_int_distribution<int> elem(0, mesh.num_elements() - 1);

  for (int k : {1, 2}) {
    for (int cfgs = 0; cfgs < 100; ++cfgs) {
      int K = elem(rng);
      DenseOracle oracle(mesh, K);
      int no = tri_space_dim(k), nb = k + 1;

      Eigen::VectorXd sloc(no + 3 * nb);
      for (int i = 0; i < sloc.size(); ++i) sloc[i] = unif(rng);
      auto G = weak_gradient_operator(mesh, K, k, k, k - 1);
      Eigen::VectorXd a = G.matrix * sloc;
      Eigen::VectorXd b = oracle.weak_gradient(sloc, k, k, k - 1);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));

      Eigen::VectorXd vloc(2 * no + 6 * nb);
      for (int i = 0; i < vloc.size(); ++i) vloc[i] = unif(rng);
      auto D = weak_divergence_operator(mesh, K, k, k, k);
      Eigen::VectorXd da = D.matrix * vloc;
      Eigen::VectorXd db = oracle.weak_divergence(vloc, k, k, k);
      CHECK((da - db).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, db.cwiseAbs().maxCoeff()));

      auto C = weak_curl_operator(mesh, K, k, k, k);
      Eigen::VectorXd ca = C.matrix * vloc;
      Eigen::VectorXd cb = oracle.weak_curl(vloc, k, k, k);
      CHECK((ca - cb).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, cb.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("weak operators are linear") {
  Mesh mesh = build_structured_mesh(3);
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> unif(-1, 1);
  int k = 2, K = 9;
  int no = tri_space_dim(k), nb = k + 1;
  auto G = weak_gradient_operator(mesh, K, k, k, k - 1);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd u(no + 3 * nb), v(no + 3 * nb);
    for (int i = 0; i < u.size(); ++i) {
      u[i] = unif(rng);
      v[i] = unif(rng);
    }
    double al = unif(rng), be = unif(rng);
    Eigen::VectorXd lhs = G.matrix * (al * u + be * v);
    Eigen::VectorXd rhs = al * (G.matrix * u) + be * (G.matrix * v);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("L2 projections") {
  Mesh mesh = build_structured_mesh(4);

  SECTION("polynomial reproduction") {
    auto f = [](Vec2 p) { return 1.0 + 2 * p.x() - 3 * p.y() + p.x() * p.y(); };
    Eigen::VectorXd c = l2_project_interior(mesh, 3, f, 2, 8);
    TriBasis b(mesh.geometry(3), 2);
    for (Vec2 p : {Vec2(0.1, 0.05), Vec2(0.2, 0.2)})
      CHECK(eval_poly(b, c, p) == Catch::Approx(f(p)).epsilon(1e-12));
  }

  SECTION("Galerkin orthogonality") {
    auto f = [](Vec2 p) { return std::exp(p.x() + p.y()); };
    int s = 2, K = 7, qdeg = 16;
    Eigen::VectorXd c = l2_project_interior(mesh, K, f, s, qdeg);
    TriBasis b(mesh.geometry(K), s);
    QuadratureRule r = for_element(triangle_quadrature(qdeg), mesh.geometry(K));
    for (int i = 0; i < b.dim(); ++i) {
      double resid = 0;
      for (std::size_t q = 0; q < r.points.size(); ++q)
        resid += r.weights[q] * (f(r.points[q]) - eval_poly(b, c, r.points[q])) *
                 b.value(i, r.points[q]);
      CHECK(std::abs(resid) < 1e-12);
    }
  }

  SECTION("L2 stability on random smooth fields") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int rep = 0; rep < 5; ++rep) {
      double a = unif(rng), b2 = unif(rng), c2 = unif(rng);
      auto f = [=](Vec2 p) { return a * std::sin(3 * p.x()) + b2 * std::cos(2 * p.y()) + c2; };
      int K = rep, s = 1, qdeg = 16;
      Eigen::VectorXd c = l2_project_interior(mesh, K, f, s, qdeg);
      TriBasis bb(mesh.geometry(K), s);
      QuadratureRule r = for_element(triangle_quadrature(qdeg), mesh.geometry(K));
      double nf = 0, np = 0;
      for (std::size_t q = 0; q < r.points.size(); ++q) {
        nf += r.weights[q] * f(r.points[q]) * f(r.points[q]);
        double pv = eval_poly(bb, c, r.points[q]);
        np += r.weights[q] * pv * pv;
      }
      CHECK(np <= nf * (1 + 1e-12));
    }
  }

  SECTION("convergence rate s+1 for exp(x+y)") {
    auto f = [](Vec2 p) { return std::exp(p.x() + p.y()); };
    for (int s : {1, 2}) {
      std::vector<double> errs;
      for (int n : {4, 8, 16}) {
        Mesh m = build_structured_mesh(n);
        double e2 = 0;
        for (int K = 0; K < m.num_elements(); ++K) {
          Eigen::VectorXd c = l2_project_interior(m, K, f, s, 16);
          TriBasis b(m.geometry(K), s);
          QuadratureRule r = for_element(triangle_quadrature(16), m.geometry(K));
          for (std::size_t q = 0; q < r.points.size(); ++q) {
            double d = f(r.points[q]) - eval_poly(b, c, r.points[q]);
            e2 += r.weights[q] * d * d;
          }
        }
        errs.push_back(std::sqrt(e2));
      }
      double rate1 = std::log2(errs[0] / errs[1]);
      double rate2 = std::log2(errs[1] / errs[2]);
      CHECK(rate1 == Catch::Approx(s + 1).margin(0.2));
      CHECK(rate2 == Catch::Approx(s + 1).margin(0.1));
    }
  }
}

TEST_CASE("RT projection") {
  Mesh mesh = build_structured_mesh(4);

  SECTION("reproduces RT fields exactly") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int s : {1, 2}) {
      RTProjection rt(mesh, 6, s);
      Eigen::VectorXd c0(rt.dim());
      for (int i = 0; i < c0.size(); ++i) c0[i] = unif(rng);
      auto v = [&](Vec2 p) { return rt.eval(c0, p); };
      Eigen::VectorXd c1 = rt.project(v, 2 * s + 4);
      CHECK((c1 - c0).cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, c0.cwiseAbs().maxCoeff()));
    }
  }

  SECTION("divergence moments match the input field") {
    // (div P_s^RT v, phi)_K = (div v, phi)_K for polynomial v of degree s+1
    int s = 2, K = 11;
    RTProjection rt(mesh, K, s);
    auto v = [](Vec2 p) {
      return Vec2(p.x() * p.x() * p.y(), p.x() - 0.3 * p.y() * p.y() * p.y());
    };
    auto divv = [](Vec2 p) { return 2 * p.x() * p.y() - 0.9 * p.y() * p.y(); };
    Eigen::VectorXd c = rt.project(v, 12);
    TriBasis b(mesh.geometry(K), s);
    QuadratureRule r = for_element(triangle_quadrature(12), mesh.geometry(K));
    for (int i = 0; i < b.dim(); ++i) {
      double lhs = 0, rhs = 0;
      for (std::size_t q = 0; q < r.points.size(); ++q) {
        lhs += r.weights[q] * rt.divergence(c, r.points[q]) * b.value(i, r.points[q]);
        rhs += r.weights[q] * divv(r.points[q]) * b.value(i, r.points[q]);
      }
      CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
  }

  SECTION("divergence-free input gives vanishing RT tail") {
    // solenoidal polynomial field: the projection lands in [P_s]^2
    auto u = [](Vec2 p) {
      double x = p.x(), y = p.y();
      double g1x = x * x * (x - 1) * (x - 1);
      double g2y = y * (y - 1) * (2 * y - 1);
      double g1y = y * y * (y - 1) * (y - 1);
      double g2x = x * (x - 1) * (2 * x - 1);
      return Vec2(-g1x * g2y, g1y * g2x);
    };
    for (int s : {1, 2}) {
      for (int K : {0, 9, 21}) {
        RTProjection rt(mesh, K, s);
        Eigen::VectorXd c = rt.project(u, 18);
        double scale = std::max(1e-30, c.cwiseAbs().maxCoeff());
        CHECK(rt.tail(c).cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, scale));
      }
    }
  }

  SECTION("edge-normal and interior moments match the input") {
    int s = 1, K = 3;
    RTProjection rt(mesh, K, s);
    auto v = [](Vec2 p) { return Vec2(std::sin(p.x() + 2 * p.y()), std::cos(p.x())); };
    Eigen::VectorXd c = rt.project(v, 20);
    const auto& g = mesh.geometry(K);
    for (int l = 0; l < 3; ++l) {
      const Edge& e = mesh.edge(mesh.element_edge(K, l));
      EdgeBasis eb(e, s);
      QuadratureRule er = for_edge(edge_quadrature(20), e, mesh);
      Vec2 n = g.outward_normal[l];
      for (int j = 0; j < eb.dim(); ++j) {
        double lhs = 0, rhs = 0;
        for (std::size_t q = 0; q < er.points.size(); ++q) {
          lhs += er.weights[q] * rt.eval(c, er.points[q]).dot(n) * eb.value(j, er.points[q]);
          rhs += er.weights[q] * v(er.points[q]).dot(n) * eb.value(j, er.points[q]);
        }
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
      }
    }
    TriBasis b0(g, s - 1);
    QuadratureRule r = for_element(triangle_quadrature(20), g);
    for (int cmp = 0; cmp < 2; ++cmp)
      for (int i = 0; i < b0.dim(); ++i) {
        double lhs = 0, rhs = 0;
        for (std::size_t q = 0; q < r.points.size(); ++q) {
          lhs += r.weights[q] * rt.eval(c, r.points[q])[cmp] * b0.value(i, r.points[q]);
          rhs += r.weights[q] * v(r.points[q])[cmp] * b0.value(i, r.points[q]);
        }
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
      }
  }

  SECTION("s = 0 rejected") {
    CHECK_THROWS_AS(RTProjection(mesh, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("commutativity identities on the 4x4 mesh") {
  Mesh mesh = build_structured_mesh(4);

  // smooth non-polynomial fields
  auto q = [](Vec2 p) { return std::exp(p.x()) * std::cos(0.8 * p.y()) + std::sin(p.y()); };
  auto gq = [](Vec2 p) {
    return Vec2(std::exp(p.x()) * std::cos(0.8 * p.y()),
                -0.8 * std::exp(p.x()) * std::sin(0.8 * p.y()) + std::cos(p.y()));
  };
  auto v = [](Vec2 p) {
    return Vec2(std::sin(p.x() + 0.5 * p.y()), std::exp(0.3 * p.x() - p.y()));
  };
  auto gv = [](Vec2 p) {
    Eigen::Matrix2d J;
    J(0, 0) = std::cos(p.x() + 0.5 * p.y());
    J(0, 1) = 0.5 * std::cos(p.x() + 0.5 * p.y());
    J(1, 0) = 0.3 * std::exp(0.3 * p.x() - p.y());
    J(1, 1) = -std::exp(0.3 * p.x() - p.y());
    return J;
  };
  auto curlv = [&](Vec2 p) {
    Eigen::Matrix2d J = gv(p);
    return J(1, 0) - J(0, 1);
  };

  const int qdeg = 20;
  for (int k : {1, 2}) {
    CAPTURE(k);
    for (int K = 0; K < mesh.num_elements(); ++K) {
      int no_k = tri_space_dim(k), nb = k + 1;

      // (a) grad_{w,k} {Q^o_{k-1} q, Q^b_k q} = Q^o_k (grad q)
      {
        Eigen::VectorXd loc = project_scalar_local(mesh, K, q, k - 1, k, qdeg);
        auto G = weak_gradient_operator(mesh, K, k - 1, k, k);
        Eigen::VectorXd got = G.matrix * loc;
        Eigen::VectorXd want(2 * no_k);
        want.head(no_k) =
            l2_project_interior(mesh, K, [&](Vec2 p) { return gq(p).x(); }, k, qdeg);
        want.tail(no_k) =
            l2_project_interior(mesh, K, [&](Vec2 p) { return gq(p).y(); }, k, qdeg);
        double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11 * scale);
      }

      // (b) grad_{w,k-1} {P_k^RT v, Q^b_k v} = Q^o_{k-1} (grad v), componentwise
      {
        RTProjection rt(mesh, K, k);
        Eigen::VectorXd rtc = rt.project(v, qdeg);
        Eigen::VectorXd pk = rt.to_polynomial(rtc);  // [P_k]^2 coefficients
        auto G = weak_gradient_operator(mesh, K, k, k, k - 1);
        int nm = tri_space_dim(k - 1);
        for (int c = 0; c < 2; ++c) {
          Eigen::VectorXd loc(no_k + 3 * nb);
          loc.head(no_k) = pk.segment(c * no_k, no_k);
          for (int l = 0; l < 3; ++l)
            loc.segment(no_k + l * nb, nb) = l2_project_edge(
                mesh, mesh.element_edge(K, l), [&](Vec2 p) { return v(p)[c]; }, k, qdeg);
          Eigen::VectorXd got = G.matrix * loc;
          Eigen::VectorXd want(2 * nm);
          want.head(nm) =
              l2_project_interior(mesh, K, [&](Vec2 p) { return gv(p)(c, 0); }, k - 1, qdeg);
          want.tail(nm) =
              l2_project_interior(mesh, K, [&](Vec2 p) { return gv(p)(c, 1); }, k - 1, qdeg);
          double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
          CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11 * scale);
        }
      }

      // (c) curl_{w,k-1} {Q^o_k w, Q^b_k w} = Q^o_{k-1} (curl w)
      {
        Eigen::VectorXd lx =
            project_scalar_local(mesh, K, [&](Vec2 p) { return v(p).x(); }, k, k, qdeg);
        Eigen::VectorXd ly =
            project_scalar_local(mesh, K, [&](Vec2 p) { return v(p).y(); }, k, k, qdeg);
        Eigen::VectorXd loc = stack_vector_local(lx, ly, no_k, nb);
        auto C = weak_curl_operator(mesh, K, k, k, k - 1);
        Eigen::VectorXd got = C.matrix * loc;
        Eigen::VectorXd want = l2_project_interior(mesh, K, curlv, k - 1, qdeg);
        double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11 * scale);
      }
    }
  }
}

TEST_CASE("weak operators agree with classical operators on conforming data") {
  // interior polynomial of degree <= m with traces equal to its restriction
  Mesh mesh = build_structured_mesh(2);
  int k = 2, K = 5;
  auto f = [](Vec2 p) { return 0.3 + p.x() - 2 * p.y() + 0.5 * p.x() * p.y(); };
  auto gf = [](Vec2 p) { return Vec2(1 + 0.5 * p.y(), -2 + 0.5 * p.x()); };
  Eigen::VectorXd loc = project_scalar_local(mesh, K, f, k, k);
  auto G = weak_gradient_operator(mesh, K, k, k, k - 1);
  Eigen::VectorXd got = G.matrix * loc;
  TriBasis bm(mesh.geometry(K), k - 1);
  for (Vec2 p : {mesh.geometry(K).centroid, mesh.geometry(K).vertex[0]}) {
    CHECK(eval_poly(bm, got.head(bm.dim()), p) == Catch::Approx(gf(p).x()).margin(1e-12));
    CHECK(eval_poly(bm, got.tail(bm.dim()), p) == Catch::Approx(gf(p).y()).margin(1e-12));
  }
}
