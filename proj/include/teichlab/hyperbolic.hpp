#pragma once

// Poincare disk model with curvature -1.  The conformal density is
//   phi(v) = 2 / (1 - |v|^2)^2,
// the Riemannian metric phi (dv dvbar + dvbar dv), line element
// 2|dv|/(1-|v|^2) and area form 2 phi dx dy, so a disk of hyperbolic
// radius R has area 2 pi (cosh R - 1) and d/dv d/dvbar log phi = phi.

#include <algorithm>
#include <array>

#include "teichlab/common.hpp"

namespace teichlab {

/// Conformal density phi(v) = 2/(1-|v|^2)^2.
inline double density_phi(const Complex& v) {
  const double s = 1.0 - std::norm(v);
  return 2.0 / (s * s);
}

/// Holomorphic disk automorphism v -> (a v + b) / (conj(b) v + conj(a)),
/// normalized to |a|^2 - |b|^2 = 1 (determined up to global sign).
struct MobiusTransform {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  static MobiusTransform identity() { return {}; }

  /// Rotation v -> e^{i theta} v.
  static MobiusTransform rotation(double theta) {
    return {std::polar(1.0, theta / 2.0), Complex(0.0, 0.0)};
  }

  /// Translation by hyperbolic length ell along the positive real axis.
  static MobiusTransform axis_translation(double ell) {
    return {Complex(std::cosh(ell / 2.0), 0.0), Complex(std::sinh(ell / 2.0), 0.0)};
  }

  Complex apply(const Complex& v) const {
    return (a * v + b) / (std::conj(b) * v + std::conj(a));
  }

  /// Complex derivative 1/(conj(b) v + conj(a))^2.
  Complex derivative(const Complex& v) const {
    const Complex d = std::conj(b) * v + std::conj(a);
    return 1.0 / (d * d);
  }

  MobiusTransform inverse() const { return {std::conj(a), -b}; }

  double det_residual() const { return std::abs(std::norm(a) - std::norm(b) - 1.0); }

  /// Renormalize |a|^2 - |b|^2 to exactly 1 (guards drift in long products).
  MobiusTransform normalized() const {
    const double d = std::sqrt(std::norm(a) - std::norm(b));
    return {a / d, b / d};
  }
};

inline MobiusTransform compose(const MobiusTransform& g, const MobiusTransform& h) {
  // Matrix product of [[a, b], [conj(b), conj(a)]] blocks.
  return {g.a * h.a + g.b * std::conj(h.b), g.a * h.b + g.b * std::conj(h.a)};
}

/// Max-norm distance between (a,b) pairs minimized over the global sign.
inline double mobius_distance(const MobiusTransform& g, const MobiusTransform& h) {
  const double plus = std::max(std::abs(g.a - h.a), std::abs(g.b - h.b));
  const double minus = std::max(std::abs(g.a + h.a), std::abs(g.b + h.b));
  return std::min(plus, minus);
}

inline bool mobius_approx_eq(const MobiusTransform& g, const MobiusTransform& h,
                             double tol = 1e-10) {
  return mobius_distance(g, h) < tol;
}

/// Geodesic distance: d(p,q) = 2 artanh |(p-q)/(1 - conj(p) q)|.
inline double hyperbolic_distance(const Complex& p, const Complex& q) {
  const double t = std::abs((p - q) / (1.0 - std::conj(p) * q));
  return 2.0 * std::atanh(std::min(t, 1.0 - 1e-16));
}

// Tangent vectors at p are stored conformally rescaled so that |xi| is the
// hyperbolic norm: xi = (coordinate vector) * 2/(1-|p|^2).  With that
// convention exp_0(t) lands at Euclidean radius tanh(t/2), and
// |disk_log(p,q)| = d(p,q).

/// Geodesic exponential; exp_p(xi) travels hyperbolic length |xi|.
inline Complex disk_exp(const Complex& p, const Complex& xi) {
  const double t = std::abs(xi);
  if (t < 1e-300) return p;
  const Complex w = std::tanh(t / 2.0) * (xi / t);
  return (w + p) / (1.0 + std::conj(p) * w);
}

/// Inverse of disk_exp: returns xi with exp_p(xi) = q and |xi| = d(p,q).
inline Complex disk_log(const Complex& p, const Complex& q) {
  const Complex w = (q - p) / (1.0 - std::conj(p) * q);
  const double r = std::abs(w);
  if (r < 1e-300) return Complex(0.0, 0.0);
  return 2.0 * std::atanh(std::min(r, 1.0 - 1e-16)) * (w / r);
}

/// Coordinate-frame velocity of the geodesic t -> exp_p(t xi) at t = 0.
inline Complex tangent_to_coordinate(const Complex& p, const Complex& xi) {
  return 0.5 * (1.0 - std::norm(p)) * xi;
}

inline Complex coordinate_to_tangent(const Complex& p, const Complex& dv) {
  return 2.0 * dv / (1.0 - std::norm(p));
}

/// Hyperbolic midpoint of the geodesic segment [p, q].
inline Complex hyperbolic_midpoint(const Complex& p, const Complex& q) {
  return disk_exp(p, 0.5 * disk_log(p, q));
}

}  // namespace teichlab
