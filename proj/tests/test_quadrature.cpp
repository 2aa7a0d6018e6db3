#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mhdwg/mesh.hpp"
#include "mhdwg/quadrature.hpp"

using namespace mhdwg;

namespace {

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// closed form: integral of x^a y^b over the reference triangle
double tri_monomial(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST_CASE("triangle rules are exact on monomials") {
  for (int q = 1; q <= 16; ++q) {
    QuadratureRule r = triangle_quadrature(q);
    CAPTURE(q, r.points.size());

    double sum = 0;
    for (double w : r.weights) sum += w;
    CHECK(std::abs(sum - 0.5) < 1e-14);

    for (int a = 0; a + 0 <= q; ++a) {
      for (int b = 0; a + b <= q; ++b) {
        double val = 0;
        for (std::size_t i = 0; i < r.points.size(); ++i)
          val += r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b);
        double exact = tri_monomial(a, b);
        CAPTURE(a, b);
        CHECK(std::abs(val - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
      }
    }
  }
  CHECK_THROWS_AS(triangle_quadrature(-1), std::invalid_argument);
  CHECK_THROWS_AS(triangle_quadrature(100), std::invalid_argument);
}

TEST_CASE("triangle rule basics") {
  QuadratureRule r = triangle_quadrature(1);
  double ix = 0;
  for (std::size_t i = 0; i < r.points.size(); ++i) ix += r.weights[i] * r.points[i].x();
  CHECK(ix == Catch::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("mapped triangle rule integrates area") {
  Mesh m = build_structured_mesh(3);
  QuadratureRule ref = triangle_quadrature(4);
  for (int K = 0; K < m.num_elements(); ++K) {
    QuadratureRule r = for_element(ref, m.geometry(K));
    double sum = 0;
    for (double w : r.weights) sum += w;
    CHECK(std::abs(sum - m.geometry(K).area) < 1e-15);
  }
}

TEST_CASE("edge rules") {
  EdgeRule r1 = edge_quadrature(1);
  REQUIRE(r1.points.size() == 1);
  CHECK(r1.points[0] == Catch::Approx(0.5));
  CHECK(r1.weights[0] == Catch::Approx(1.0));

  EdgeRule r3 = edge_quadrature(3);
  double ix3 = 0;
  for (std::size_t i = 0; i < r3.points.size(); ++i)
    ix3 += r3.weights[i] * std::pow(r3.points[i], 3);
  CHECK(ix3 == Catch::Approx(0.25).epsilon(1e-14));

  // rules sized for triple products of degree-k traces: exactness >= 3k
  for (int k : {1, 2, 3}) {
    EdgeRule r = edge_quadrature(3 * k);
    for (int p = 0; p <= 3 * k; ++p) {
      double v = 0;
      for (std::size_t i = 0; i < r.points.size(); ++i)
        v += r.weights[i] * std::pow(r.points[i], p);
      CHECK(std::abs(v - 1.0 / (p + 1)) < 1e-14);
    }
  }

  CHECK_THROWS_AS(edge_quadrature(-1), std::invalid_argument);
}

TEST_CASE("gauss legendre high order") {
  std::vector<double> x, w;
  gauss_legendre(12, x, w);
  double s = 0;
  for (double wi : w) s += wi;
  CHECK(s == Catch::Approx(2.0).epsilon(1e-14));
  // integral of x^22 on [-1,1] = 2/23
  double v = 0;
  for (std::size_t i = 0; i < x.size(); ++i) v += w[i] * std::pow(x[i], 22);
  CHECK(v == Catch::Approx(2.0 / 23.0).epsilon(1e-12));
}
