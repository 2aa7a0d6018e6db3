#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "mhdwg/mesh.hpp"

using namespace mhdwg;

TEST_CASE("structured mesh counts") {
  Mesh m1 = build_structured_mesh(1);
  CHECK(m1.num_elements() == 2);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_edges() == 5);

  // Euler relation V - E + F = 1 gives 56 edges on the 4x4 mesh.
  Mesh m4 = build_structured_mesh(4);
  CHECK(m4.num_elements() == 32);
  CHECK(m4.num_vertices() == 25);
  CHECK(m4.num_edges() == 56);
  CHECK(m4.num_boundary_edges() == 16);

  Mesh m128 = build_structured_mesh(128);
  CHECK(m128.num_elements() == 32768);
  CHECK(m128.num_vertices() == 129 * 129);
  CHECK(m128.num_vertices() - m128.num_edges() + m128.num_elements() == 1);

  CHECK_THROWS_AS(build_structured_mesh(0), std::invalid_argument);
}

TEST_CASE("element geometry") {
  Mesh m = build_structured_mesh(1);
  // element 0 is the lower triangle (0,0),(1,0),(1,1)
  const ElementGeometry& g = m.geometry(0);
  CHECK(g.area == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(g.diameter == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));

  // the diagonal runs (0,0)-(1,1); its outward normal from element 0 is (-1,1)/sqrt(2)
  Vec2 nd = g.outward_normal[2];
  CHECK(nd.x() == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(nd.y() == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  Mesh m4 = build_structured_mesh(4);
  for (int K = 0; K < m4.num_elements(); ++K)
    CHECK(m4.geometry(K).diameter == Catch::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));

  CHECK_THROWS_AS(m4.geometry(-1), std::out_of_range);
  CHECK_THROWS_AS(m4.geometry(32), std::out_of_range);
}

TEST_CASE("hypotenuse normal of reference-like triangle") {
  // explicit triangle (0,0),(1,0),(0,1): hypotenuse normal is (1,1)/sqrt(2)
  Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
  const ElementGeometry& g = m.geometry(0);
  CHECK(g.area == Catch::Approx(0.5));
  CHECK(g.diameter == Catch::Approx(std::sqrt(2.0)));
  CHECK(g.outward_normal[1].x() == Catch::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g.outward_normal[1].y() == Catch::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("neighbors") {
  Mesh m1 = build_structured_mesh(1);
  // diagonal edge of element 0 is local edge 2
  auto nb = m1.neighbor(0, 2);
  REQUIRE(nb.has_value());
  CHECK(*nb == 1);
  CHECK_FALSE(m1.neighbor(0, 0).has_value());

  Mesh m4 = build_structured_mesh(4);
  int with_neighbor = 0;
  for (int e = 0; e < m4.num_edges(); ++e)
    if (!m4.edge(e).boundary) ++with_neighbor;
  CHECK(with_neighbor == 40);  // 56 - 16 boundary edges
}

TEST_CASE("mesh invariants") {
  for (int n : {1, 3, 4, 7}) {
    Mesh m = build_structured_mesh(n);
    CAPTURE(n);

    double total_area = 0;
    for (int K = 0; K < m.num_elements(); ++K) total_area += m.geometry(K).area;
    CHECK(std::abs(total_area - 1.0) < 1e-14);

    // divergence theorem on constants: sum of h_e n_e over each element boundary
    for (int K = 0; K < m.num_elements(); ++K) {
      const auto& g = m.geometry(K);
      Vec2 s = Vec2::Zero();
      for (int l = 0; l < 3; ++l) s += g.edge_length[l] * g.outward_normal[l];
      CHECK(s.norm() < 1e-14);
    }

    // interior-edge reciprocity of outward normals
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& ed = m.edge(e);
      CHECK(std::abs(ed.normal.norm() - 1.0) < 1e-14);
      if (ed.boundary) continue;
      Vec2 n0, n1;
      for (int side = 0; side < 2; ++side) {
        int K = ed.elem[side];
        for (int l = 0; l < 3; ++l)
          if (m.element_edge(K, l) == e) (side == 0 ? n0 : n1) = m.geometry(K).outward_normal[l];
      }
      CHECK((n0 + n1).norm() < 1e-14);
    }

    // counterclockwise orientation enforced at construction; edges consistent
    CHECK(m.num_vertices() - m.num_edges() + m.num_elements() == 1);
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& ed = m.edge(e);
      CHECK(ed.v0 < ed.v1);
      CHECK((ed.boundary ? ed.elem[1] == -1 : ed.elem[1] >= 0));
    }
  }
}

TEST_CASE("mesh dump") {
  Mesh m = build_structured_mesh(2);
  std::ostringstream os;
  m.dump(os);
  std::istringstream is(os.str());
  std::string tag;
  int nv;
  is >> tag >> nv;
  CHECK(tag == "vertices");
  CHECK(nv == 9);
}

TEST_CASE("non-ccw element rejected") {
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}}}), std::runtime_error);
}
