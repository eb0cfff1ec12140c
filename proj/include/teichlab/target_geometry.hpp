#pragma once

// Target manifolds for the harmonic maps: the hyperbolic disk (conformal
// density 2/(1-|w|^2)^2, curvature -1) and the flat square torus R^2/Z^2.
// Curvature is served two ways: the constant-curvature closed form on
// complexified arguments (used by the variational formulas) and the
// coordinate formula from metric derivatives (used as a cross-check).

#include <array>

#include "teichlab/common.hpp"

namespace teichlab {

enum class TargetKind { Hyperbolic, FlatTorus };

inline const char* target_name(TargetKind k) {
  return k == TargetKind::Hyperbolic ? "hyperbolic" : "torus";
}

/// Complexified tangent vector at a target point, components along
/// d/dw and d/dwbar.  Real vectors have cwbar = conj(cw).
struct ComplexTangent {
  Complex cw{0, 0};
  Complex cwbar{0, 0};

  ComplexTangent conjugate() const { return {std::conj(cwbar), std::conj(cw)}; }

  /// Components in the real coordinate frame (complex coefficients).
  Complex x1() const { return 0.5 * (cw + cwbar); }
  Complex x2() const { return Complex(0, 0.5) * (cwbar - cw); }

  static ComplexTangent from_real(const Complex& v) { return {v, std::conj(v)}; }
};

struct TargetGeometry {
  TargetKind kind = TargetKind::Hyperbolic;

  /// Metric g = rho(w) (dx^2 + dy^2) in real coordinates.
  double rho(const Complex& w) const {
    if (kind == TargetKind::FlatTorus) return 1.0;
    return 4.0 / sqr(1.0 - std::norm(w));
  }

  /// Conformal coefficient in the energy density: c = rho/2, so the energy
  /// is int c (|w_v|^2 + |w_vbar|^2) sqrt(-1) dv dvbar at mu = 0.
  double energy_coefficient(const Complex& w) const { return 0.5 * rho(w); }

  /// Wirtinger derivative of the energy coefficient, d c / d wbar.
  Complex energy_coefficient_dwbar(const Complex& w) const {
    if (kind == TargetKind::FlatTorus) return {0, 0};
    const double s = 1.0 - std::norm(w);
    return 4.0 * w / (s * s * s);
  }

  /// Christoffel symbol Gamma^w_{ww} = d_w log rho (conformal metric).
  Complex christoffel(const Complex& w) const {
    if (kind == TargetKind::FlatTorus) return {0, 0};
    return 2.0 * std::conj(w) / (1.0 - std::norm(w));
  }

  double gauss_curvature() const { return kind == TargetKind::FlatTorus ? 0.0 : -1.0; }

  /// Bilinear extension of g to complexified tangents:
  /// g(A, B) = (rho/2) (A^w B^wbar + A^wbar B^w).
  Complex metric(const Complex& w, const ComplexTangent& A, const ComplexTangent& B) const {
    return 0.5 * rho(w) * (A.cw * B.cwbar + A.cwbar * B.cw);
  }

  /// R(X,Y,Z,W) = kappa (g(X,Z) g(Y,W) - g(Y,Z) g(X,W)) for the constant
  /// curvature targets, complex-multilinear.
  Complex riemann(const Complex& w, const ComplexTangent& X, const ComplexTangent& Y,
                  const ComplexTangent& Z, const ComplexTangent& W) const {
    const double kappa = gauss_curvature();
    if (kappa == 0.0) return {0, 0};
    return kappa * (metric(w, X, Z) * metric(w, Y, W) - metric(w, Y, Z) * metric(w, X, W));
  }

  /// Hermitian sectional curvature K(X^Y) = R(X,Y,Xbar,Ybar) / den with
  /// den = |X|^2 |Y|^2 - |<X, Ybar>|^2 (sesquilinear norms).
  Complex hermitian_sectional(const Complex& w, const ComplexTangent& X,
                              const ComplexTangent& Y) const {
    const Complex nx = metric(w, X, X.conjugate());
    const Complex ny = metric(w, Y, Y.conjugate());
    const Complex cross = metric(w, X, Y.conjugate());
    const double den = nx.real() * ny.real() - std::norm(cross);
    if (den <= 1e-12)
      throw Error(ErrorCode::degenerate_metric, "degenerate complexified plane");
    return riemann(w, X, Y, X.conjugate(), Y.conjugate()) / den;
  }

  // ---- coordinate-formula route (cross-checks) ----

  std::array<double, 2> metric_gradient_rho(const Complex& w) const {
    if (kind == TargetKind::FlatTorus) return {0.0, 0.0};
    const double s = 1.0 - std::norm(w);
    const double f = 16.0 / (s * s * s);
    return {f * w.real(), f * w.imag()};
  }

  double metric_hessian_rho(const Complex& w, int i, int j) const {
    if (kind == TargetKind::FlatTorus) return 0.0;
    const double s = 1.0 - std::norm(w);
    const double xi = (i == 0) ? w.real() : w.imag();
    const double xj = (j == 0) ? w.real() : w.imag();
    return (i == j ? 16.0 / (s * s * s) : 0.0) + 96.0 * xi * xj / (s * s * s * s);
  }

  /// Gamma^k_{ij} from the conformal metric rho * I.
  double christoffel_real(const Complex& w, int k, int i, int j) const {
    const auto dr = metric_gradient_rho(w);
    const double r = rho(w);
    return ((j == k ? dr[i] : 0.0) + (i == k ? dr[j] : 0.0) - (i == j ? dr[k] : 0.0)) /
           (2.0 * r);
  }

  /// R_{ikjl} = R(d_i, d_k, d_j, d_l) assembled from metric derivatives:
  /// -1/2 (g_ij,kl + g_kl,ij - g_il,kj - g_kj,il)
  /// - g^{mn} (Gamma^m_ij Gamma^n_kl - Gamma^m_il Gamma^n_kj).
  double riemann_coordinate(const Complex& w, int i, int k, int j, int l) const {
    auto d2g = [&](int a, int b, int c, int d) {
      return a == b ? metric_hessian_rho(w, c, d) : 0.0;
    };
    double val = -0.5 * (d2g(i, j, k, l) + d2g(k, l, i, j) - d2g(i, l, k, j) -
                         d2g(k, j, i, l));
    for (int m = 0; m < 2; ++m)
      val -= rho(w) * (christoffel_real(w, m, i, j) * christoffel_real(w, m, k, l) -
                       christoffel_real(w, m, i, l) * christoffel_real(w, m, k, j));
    return val;
  }

  /// Complex-multilinear extension of the coordinate-formula tensor.
  Complex riemann_via_coordinates(const Complex& w, const ComplexTangent& X,
                                  const ComplexTangent& Y, const ComplexTangent& Z,
                                  const ComplexTangent& W) const {
    const std::array<Complex, 2> xs{X.x1(), X.x2()}, ys{Y.x1(), Y.x2()}, zs{Z.x1(), Z.x2()},
        ws{W.x1(), W.x2()};
    Complex sum(0, 0);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
          for (int l = 0; l < 2; ++l)
            sum += riemann_coordinate(w, i, k, j, l) * xs[i] * ys[k] * zs[j] * ws[l];
    return sum;
  }
};

}  // namespace teichlab
