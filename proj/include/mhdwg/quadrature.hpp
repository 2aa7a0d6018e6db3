// Quadrature rules: symmetric triangle rules through degree 8, tensorized
// Duffy rules beyond, and Gauss-Legendre rules on edges.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mhdwg/mesh.hpp"

namespace mhdwg {

struct QuadratureRule {
  std::vector<Vec2> points;     // reference triangle (0,0),(1,0),(0,1), or physical after mapping
  std::vector<double> weights;  // sum to the measure of the domain
  int exactness = 0;
};

struct EdgeRule {
  std::vector<double> points;   // parameters in [0,1]
  std::vector<double> weights;  // sum to 1
  int exactness = 0;
};

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = t;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    // recompute derivative at the converged node
    p0 = 1.0;
    p1 = t;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[n - 1 - i] = t;
    x[i] = -t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

// Gauss rule on a segment, exact for polynomials of degree q. Weights sum to 1.
inline EdgeRule edge_quadrature(int q) {
  if (q < 0) throw std::invalid_argument("edge_quadrature: negative degree");
  int n = q / 2 + 1;
  if (n > 200) throw std::invalid_argument("edge_quadrature: degree too large");
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  EdgeRule r;
  r.exactness = 2 * n - 1;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.points[i] = 0.5 * (x[i] + 1.0);
    r.weights[i] = 0.5 * w[i];
  }
  return r;
}

namespace detail {

// Symmetric rules on the reference triangle, normalized weights (sum 1).
// Orbit types: 0 = centroid, 1 = three permutations of (a, b, b) with
// b = (1-a)/2, 2 = six permutations of (a, b, 1-a-b).
struct Orbit {
  int type;
  double a, b, w;
};

inline const std::vector<Orbit>& triangle_orbits(int q) {
  static const std::vector<std::vector<Orbit>> tables = {
      // degree 1
      {{0, 0, 0, 1.0}},
      // degree 2
      {{1, 2.0 / 3.0, 0, 1.0 / 3.0}},
      // degree 3
      {{0, 0, 0, -0.5625}, {1, 0.6, 0, 25.0 / 48.0}},
      // degree 4
      {{1, 0.108103018168070, 0, 0.22338158967801180},
       {1, 0.816847572980459, 0, 0.10995174365532157}},
      // degree 5
      {{0, 0, 0, 0.225},
       {1, 0.059715871789770, 0, 0.13239415278850589},
       {1, 0.797426985353087, 0, 0.12593918054482739}},
      // degree 6
      {{1, 0.501426509658179, 0, 0.11678627572637941},
       {1, 0.873821971016996, 0, 0.05084490637020649},
       {2, 0.053145049844817, 0.310352451033784, 0.08285107561837363}},
      // degree 7
      {{0, 0, 0, -0.14957004446768998},
       {1, 0.479308067841920, 0, 0.17561525743321194},
       {1, 0.869739794195568, 0, 0.05334723560883878},
       {2, 0.048690315425316, 0.312865496004874, 0.07711376089025619}},
      // degree 8
      {{0, 0, 0, 0.14431560767778573},
       {1, 0.081414823414554, 0, 0.09509163426728490},
       {1, 0.658861384496480, 0, 0.10321737053471795},
       {1, 0.898905543365938, 0, 0.03245849762319814},
       {2, 0.008394777409958, 0.263112829634638, 0.02723031417443484}}};
  return tables[q - 1];
}

inline void push_bary(QuadratureRule& r, double l1, double l2, double l3, double w) {
  // reference vertices (0,0), (1,0), (0,1)
  r.points.emplace_back(l2, l3);
  r.weights.push_back(0.5 * w);
  (void)l1;
}

}  // namespace detail

// Rule on the reference triangle, exact for polynomials of total degree q.
// Tabulated symmetric rules cover q <= 8; collapsed tensor rules beyond.
inline QuadratureRule triangle_quadrature(int q) {
  if (q < 0) throw std::invalid_argument("triangle_quadrature: negative degree");
  if (q > 60) throw std::invalid_argument("triangle_quadrature: degree too large");
  QuadratureRule r;
  if (q == 0) q = 1;
  if (q <= 8) {
    r.exactness = q;
    for (const auto& o : detail::triangle_orbits(q)) {
      if (o.type == 0) {
        detail::push_bary(r, 1.0 / 3, 1.0 / 3, 1.0 / 3, o.w);
      } else if (o.type == 1) {
        double a = o.a, b = (1.0 - o.a) / 2.0;
        detail::push_bary(r, a, b, b, o.w);
        detail::push_bary(r, b, a, b, o.w);
        detail::push_bary(r, b, b, a, o.w);
      } else {
        double a = o.a, b = o.b, c = 1.0 - o.a - o.b;
        detail::push_bary(r, a, b, c, o.w);
        detail::push_bary(r, a, c, b, o.w);
        detail::push_bary(r, b, a, c, o.w);
        detail::push_bary(r, b, c, a, o.w);
        detail::push_bary(r, c, a, b, o.w);
        detail::push_bary(r, c, b, a, o.w);
      }
    }
    return r;
  }
  // Duffy transform: x = s, y = t(1-s), dxdy = (1-s) ds dt.
  int n = q / 2 + 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  r.exactness = q;
  r.points.reserve(n * n);
  r.weights.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    double s = 0.5 * (x[i] + 1.0), ws = 0.5 * w[i];
    for (int j = 0; j < n; ++j) {
      double t = 0.5 * (x[j] + 1.0), wt = 0.5 * w[j];
      r.points.emplace_back(s, t * (1.0 - s));
      r.weights.push_back(ws * wt * (1.0 - s));
    }
  }
  return r;
}

// Map a reference-triangle rule to a physical element.
inline QuadratureRule for_element(const QuadratureRule& ref, const ElementGeometry& g) {
  QuadratureRule r;
  r.exactness = ref.exactness;
  double scale = 2.0 * g.area;  // |det J| = 2 * area
  r.points.reserve(ref.points.size());
  r.weights.reserve(ref.points.size());
  for (std::size_t i = 0; i < ref.points.size(); ++i) {
    r.points.push_back(g.vertex[0] + g.jacobian * ref.points[i]);
    r.weights.push_back(scale * ref.weights[i]);
  }
  return r;
}

// Map a [0,1] rule onto a mesh edge; weights then sum to the edge length.
inline QuadratureRule for_edge(const EdgeRule& ref, const Edge& e, const Mesh& mesh) {
  QuadratureRule r;
  r.exactness = ref.exactness;
  const Vec2 a = mesh.vertex(e.v0), b = mesh.vertex(e.v1);
  r.points.reserve(ref.points.size());
  r.weights.reserve(ref.points.size());
  for (std::size_t i = 0; i < ref.points.size(); ++i) {
    r.points.push_back(a + ref.points[i] * (b - a));
    r.weights.push_back(ref.weights[i] * e.length);
  }
  return r;
}

}  // namespace mhdwg
