// Manufactured solutions with closed-form derivatives and the forcing terms
// derived from the steady incompressible MHD system
//
//   -Ha^-2 Lap(u) + N^-1 div(u otimes u) + grad p - Rm^-1 (curl B) x B = f
//   Rm^-1 curl curl B - curl (u x B) + grad r = g
//
// with the 2D conventions: curl of a vector is the scalar d_x w2 - d_y w1,
// curl of a scalar t is (d_y t, -d_x t), s x B = (-s B2, s B1) for scalar s.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "mhdwg/forms.hpp"
#include "mhdwg/mesh.hpp"

namespace mhdwg {

struct ManufacturedCase {
  int id = 0;
  PhysicalParams params;

  std::function<Vec2(Vec2)> u, B;
  std::function<Eigen::Matrix2d(Vec2)> grad_u, grad_B;  // row c = gradient of component c
  std::function<Vec2(Vec2)> lap_u;
  std::function<double(Vec2)> curl_B;
  std::function<Vec2(Vec2)> grad_curl_B;
  std::function<double(Vec2)> p, r;
  std::function<Vec2(Vec2)> grad_p, grad_r;

  std::function<Vec2(Vec2)> f, g;  // derived forcing
};

namespace detail {

// assembles f and g from the stored callables
inline void derive_forcing(ManufacturedCase& mc) {
  const double Ha = mc.params.Ha, N = mc.params.N, Rm = mc.params.Rm;
  auto u = mc.u, B = mc.B;
  auto gu = mc.grad_u, gB = mc.grad_B;
  auto lap = mc.lap_u;
  auto curlB = mc.curl_B;
  auto gcurlB = mc.grad_curl_B;
  auto gp = mc.grad_p, gr = mc.grad_r;

  mc.f = [=](Vec2 x) {
    Vec2 uu = u(x);
    Eigen::Matrix2d G = gu(x);
    Vec2 conv = G * uu;  // (u . grad) u, valid since div u = 0
    double s = curlB(x);
    Vec2 lorentz(-s * B(x).y(), s * B(x).x());  // (curl B) x B
    return Vec2(-lap(x) / (Ha * Ha) + conv / N + gp(x) - lorentz / Rm);
  };

  mc.g = [=](Vec2 x) {
    Vec2 gs = gcurlB(x);
    Vec2 curlcurl(gs.y(), -gs.x());
    // t = u x B, curl t = (d_y t, -d_x t)
    Eigen::Matrix2d Gu = gu(x), GB = gB(x);
    Vec2 uu = u(x), BB = B(x);
    double tx = Gu(0, 0) * BB.y() + uu.x() * GB(1, 0) - Gu(1, 0) * BB.x() - uu.y() * GB(0, 0);
    double ty = Gu(0, 1) * BB.y() + uu.x() * GB(1, 1) - Gu(1, 1) * BB.x() - uu.y() * GB(0, 1);
    Vec2 curl_uxB(ty, -tx);
    return Vec2(curlcurl / Rm - curl_uxB + gr(x));
  };
}

// the solenoidal polynomial pair used by both examples:
//   v1 = -g1(x) g2(y), v2 = g1(y) g2(x) with g1 = x^2(x-1)^2, g2 = x(x-1)(2x-1)
struct PolyStream {
  static double g1(double x) { return x * x * (x - 1) * (x - 1); }
  static double dg1(double x) { return 2 * x * (x - 1) * (2 * x - 1); }
  static double ddg1(double x) { return 12 * x * x - 12 * x + 2; }
  static double g2(double x) { return x * (x - 1) * (2 * x - 1); }
  static double dg2(double x) { return 6 * x * x - 6 * x + 1; }
  static double ddg2(double x) { return 12 * x - 6; }

  static Vec2 value(Vec2 p) {
    return Vec2(-g1(p.x()) * g2(p.y()), g1(p.y()) * g2(p.x()));
  }
  static Eigen::Matrix2d grad(Vec2 p) {
    Eigen::Matrix2d J;
    J(0, 0) = -dg1(p.x()) * g2(p.y());
    J(0, 1) = -g1(p.x()) * dg2(p.y());
    J(1, 0) = g1(p.y()) * dg2(p.x());
    J(1, 1) = dg1(p.y()) * g2(p.x());
    return J;
  }
  static Vec2 laplacian(Vec2 p) {
    return Vec2(-ddg1(p.x()) * g2(p.y()) - g1(p.x()) * ddg2(p.y()),
                g1(p.y()) * ddg2(p.x()) + ddg1(p.y()) * g2(p.x()));
  }
  static double curl(Vec2 p) {
    // d_x v2 - d_y v1
    return g1(p.y()) * dg2(p.x()) + g1(p.x()) * dg2(p.y());
  }
  static Vec2 grad_curl(Vec2 p) {
    return Vec2(g1(p.y()) * ddg2(p.x()) + dg1(p.x()) * dg2(p.y()),
                dg1(p.y()) * dg2(p.x()) + g1(p.x()) * ddg2(p.y()));
  }
};

// h(x) h(y) with h = x(x-1)(x-1/2); vanishes on the boundary, zero mean
struct PolyBubbleScalar {
  static double h(double x) { return x * (x - 1) * (x - 0.5); }
  static double dh(double x) { return 3 * x * x - 3 * x + 0.5; }
  static double value(Vec2 p) { return h(p.x()) * h(p.y()); }
  static Vec2 grad(Vec2 p) { return Vec2(dh(p.x()) * h(p.y()), h(p.x()) * dh(p.y())); }
};

}  // namespace detail

inline ManufacturedCase manufactured_case(int id, const PhysicalParams& prm) {
  using detail::PolyBubbleScalar;
  using detail::PolyStream;
  ManufacturedCase mc;
  mc.id = id;
  mc.params = prm;

  if (id == 1) {
    mc.u = PolyStream::value;
    mc.grad_u = PolyStream::grad;
    mc.lap_u = PolyStream::laplacian;
    mc.B = PolyStream::value;
    mc.grad_B = PolyStream::grad;
    mc.curl_B = PolyStream::curl;
    mc.grad_curl_B = PolyStream::grad_curl;
    mc.p = PolyBubbleScalar::value;
    mc.grad_p = PolyBubbleScalar::grad;
    mc.r = PolyBubbleScalar::value;
    mc.grad_r = PolyBubbleScalar::grad;
  } else if (id == 2) {
    const double pi = M_PI;
    mc.u = [=](Vec2 q) {
      return Vec2(std::sin(pi * q.x()) * std::cos(pi * q.y()),
                  -std::cos(pi * q.x()) * std::sin(pi * q.y()));
    };
    mc.grad_u = [=](Vec2 q) {
      Eigen::Matrix2d J;
      J(0, 0) = pi * std::cos(pi * q.x()) * std::cos(pi * q.y());
      J(0, 1) = -pi * std::sin(pi * q.x()) * std::sin(pi * q.y());
      J(1, 0) = pi * std::sin(pi * q.x()) * std::sin(pi * q.y());
      J(1, 1) = -pi * std::cos(pi * q.x()) * std::cos(pi * q.y());
      return J;
    };
    auto u2 = mc.u;
    mc.lap_u = [=](Vec2 q) { return Vec2(-2 * pi * pi * u2(q)); };
    mc.B = PolyStream::value;
    mc.grad_B = PolyStream::grad;
    mc.curl_B = PolyStream::curl;
    mc.grad_curl_B = PolyStream::grad_curl;
    mc.p = [](Vec2 q) { return std::pow(q.x(), 6) - std::pow(q.y(), 6); };
    mc.grad_p = [](Vec2 q) {
      return Vec2(6 * std::pow(q.x(), 5), -6 * std::pow(q.y(), 5));
    };
    mc.r = PolyBubbleScalar::value;
    mc.grad_r = PolyBubbleScalar::grad;
  } else {
    throw std::invalid_argument("manufactured_case: id must be 1 or 2");
  }

  detail::derive_forcing(mc);
  return mc;
}

}  // namespace mhdwg
