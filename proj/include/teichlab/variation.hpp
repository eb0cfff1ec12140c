#pragma once

// Variational identities at the base point z = 0 and finite-difference
// Levi forms of scalar functions on the chart.
//
// At z = 0 the chart's harmonic directions mu_a coincide with the
// horizontal-lift velocities of the fibration (both are the harmonic
// representative of the same deformation class, and a genus-2 surface
// carries no holomorphic vector fields to absorb the difference), so the
// variational formulas evaluate with the fixed-point velocity fields
// d u*/d z^a directly.

#include <functional>
#include <map>

#include "teichlab/harmonic.hpp"

namespace teichlab {

// ---- finite-difference machinery ----

/// Hermitian matrix of d^2 f / dz^a dzbar^b estimates with per-entry
/// Richardson error bars (|h estimate - h/2 estimate|).
struct LeviForm {
  Eigen::Matrix3cd matrix;
  Eigen::Matrix3d error_bar;
  double h = 0.0;

  double max_error_bar() const { return error_bar.maxCoeff(); }

  Eigen::Vector3d eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (matrix + matrix.adjoint()));
    return es.eigenvalues();
  }
};

/// Memoizing wrapper so the h and h/2 stencils share evaluations.
class SampledFunction {
 public:
  explicit SampledFunction(std::function<double(const TeichPoint&)> f) : f_(std::move(f)) {}

  double operator()(const TeichPoint& z) const {
    std::array<double, 6> key{z(0).real(), z(0).imag(), z(1).real(),
                              z(1).imag(), z(2).real(), z(2).imag()};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double val = f_(z);
    cache_.emplace(key, val);
    return val;
  }

  std::size_t evaluations() const { return cache_.size(); }

 private:
  std::function<double(const TeichPoint&)> f_;
  mutable std::map<std::array<double, 6>, double> cache_;
};

namespace detail {

/// Five-point complex Laplacian along the direction zeta:
/// sum_ab zeta^a conj(zeta^b) L_ab + O(h^2).
inline double complex_laplacian(const SampledFunction& f, const TeichPoint& z0,
                                const TeichPoint& zeta, double h, double f0) {
  const Complex i(0, 1);
  return (f(z0 + h * zeta) + f(z0 - h * zeta) + f(z0 + (i * h) * zeta) +
          f(z0 - (i * h) * zeta) - 4.0 * f0) /
         (4.0 * h * h);
}

inline Eigen::Matrix3cd levi_once(const SampledFunction& f, const TeichPoint& z0, double h) {
  const double f0 = f(z0);
  Eigen::Matrix3cd L;
  std::array<TeichPoint, 3> e;
  for (int a = 0; a < 3; ++a) {
    e[a] = TeichPoint::Zero();
    e[a](a) = 1.0;
    L(a, a) = complex_laplacian(f, z0, e[a], h, f0);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double p = complex_laplacian(f, z0, e[a] + e[b], h, f0);
      const double m = complex_laplacian(f, z0, e[a] - e[b], h, f0);
      const double pi = complex_laplacian(f, z0, e[a] + Complex(0, 1) * e[b], h, f0);
      const double mi = complex_laplacian(f, z0, e[a] - Complex(0, 1) * e[b], h, f0);
      L(a, b) = Complex(0.25 * (p - m), 0.25 * (pi - mi));
      L(b, a) = std::conj(L(a, b));
    }
  return L;
}

}  // namespace detail

inline LeviForm levi_form(const SampledFunction& f, const TeichPoint& z0, double h) {
  const Eigen::Matrix3cd Lh = detail::levi_once(f, z0, h);
  const Eigen::Matrix3cd Lh2 = detail::levi_once(f, z0, h / 2.0);
  LeviForm out;
  out.h = h;
  out.matrix = (4.0 * Lh2 - Lh) / 3.0;
  out.error_bar = (Lh2 - Lh).cwiseAbs();
  return out;
}

/// Wirtinger gradient dE/dz^a by central differences with Richardson.
inline Eigen::Vector3cd first_derivative_fd(const SampledFunction& f, const TeichPoint& z0,
                                            double h) {
  auto once = [&](double hh) {
    Eigen::Vector3cd d;
    for (int a = 0; a < 3; ++a) {
      TeichPoint e = TeichPoint::Zero();
      e(a) = 1.0;
      const Complex i(0, 1);
      const double dx = (f(z0 + hh * e) - f(z0 - hh * e)) / (2.0 * hh);
      const double dy = (f(z0 + (i * hh) * e) - f(z0 - (i * hh) * e)) / (2.0 * hh);
      d(a) = 0.5 * Complex(dx, -dy);
    }
    return d;
  };
  return (4.0 * once(h / 2.0) - once(h)) / 3.0;
}

// ---- variational formulas at z = 0 ----

namespace detail {

struct TriangleFields {
  Complex wv, wvbar;             // map derivatives, constant per triangle
  std::array<Complex, 3> w;      // corner values
  std::array<Complex, 3> vc[2];  // corner velocities: [0] = V_a, [1] = V_abar
  Complex vv[2], vvbar[2];       // their Wirtinger derivatives
};

inline TriangleFields gather_fields(const QuotientMesh& mesh, const MapField& base,
                                    const VelocityPair* vel, std::size_t t) {
  TriangleFields f;
  f.wv = f.wvbar = Complex(0, 0);
  f.vv[0] = f.vv[1] = f.vvbar[0] = f.vvbar[1] = Complex(0, 0);
  for (int c = 0; c < 3; ++c) {
    const int vtx = mesh.triangles[t][c];
    const Complex a = mesh.tri_dv_coeff[t][c];
    f.w[c] = map_vertex_value(mesh, base, vtx);
    f.wv += a * f.w[c];
    f.wvbar += std::conj(a) * f.w[c];
    if (vel) {
      f.vc[0][c] = velocity_vertex_value(mesh, base, vel->v, vtx);
      f.vc[1][c] = velocity_vertex_value(mesh, base, vel->vbar, vtx);
      for (int s = 0; s < 2; ++s) {
        f.vv[s] += a * f.vc[s][c];
        f.vvbar[s] += std::conj(a) * f.vc[s][c];
      }
    }
  }
  return f;
}

inline Complex interp(const std::array<Complex, 3>& w, int q) {
  return 0.5 * (w[q] + w[(q + 1) % 3]);
}

}  // namespace detail

/// dE/dz^a = - int g_ij u^i_v u^j_v mu_a sqrt(-1) dv dvbar, evaluated with
/// the same per-triangle quadrature as the energy (exact derivative of the
/// discrete functional at z = 0 up to the solver tolerance).
inline Eigen::Vector3cd first_variation_formula(const QuotientMesh& mesh,
                                                const DeformationChart& chart,
                                                const TargetGeometry& target,
                                                const MapField& map) {
  Eigen::Vector3cd out = Eigen::Vector3cd::Zero();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto f = detail::gather_fields(mesh, map, nullptr, t);
    double S = 0.0;
    for (int q = 0; q < 3; ++q) S += target.energy_coefficient(detail::interp(f.w, q));
    S /= 3.0;
    const Complex density = -4.0 * mesh.tri_area[t] * S * f.wv * std::conj(f.wvbar);
    for (int a = 0; a < 3; ++a) out(a) += density * chart.mu_bary[t][a];
  }
  return out;
}

/// Both sides of the first-variation Cauchy-Schwarz bound for a chart
/// direction xi:
///   |xi^a dE/dz^a|^2 <= E * ||nabla_{xibar delta} d^V u||^2.
struct CauchySchwarzSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Covariant tangents of the second-variation formula for direction a:
///   Q_a = nabla_vbar V_a - mu_a du_v           (the d-bar side)
///   P_a = nabla_v V_abar - conj(mu_a) du_vbar  (the d side)
namespace detail {

inline ComplexTangent du_v(const TriangleFields& f) {
  return {f.wv, std::conj(f.wvbar)};
}
inline ComplexTangent du_vbar(const TriangleFields& f) {
  return {f.wvbar, std::conj(f.wv)};
}

// Components over the complexified target frame.  The w-bar component of
// the section z^a |-> u has velocity conj(V_abar), so its derivatives come
// from the opposite-type field.
inline ComplexTangent q_tangent(const TargetGeometry& target, const TriangleFields& f,
                                const Complex& w, const Complex& va, const Complex& vabar,
                                const Complex& va_vbar, const Complex& vabar_v,
                                const Complex& mu_a) {
  const Complex gamma = target.christoffel(w);
  ComplexTangent Q;
  Q.cw = va_vbar + gamma * va * f.wvbar - mu_a * f.wv;
  Q.cwbar = std::conj(vabar_v) + std::conj(gamma) * std::conj(vabar) * std::conj(f.wv) -
            mu_a * std::conj(f.wvbar);
  return Q;
}

inline ComplexTangent p_tangent(const TargetGeometry& target, const TriangleFields& f,
                                const Complex& w, const Complex& vb, const Complex& vbbar,
                                const Complex& vbbar_v, const Complex& vb_vbar,
                                const Complex& mu_b) {
  const Complex gamma = target.christoffel(w);
  ComplexTangent P;
  P.cw = vbbar_v + gamma * vbbar * f.wv - std::conj(mu_b) * f.wvbar;
  P.cwbar = std::conj(vb_vbar) + std::conj(gamma) * std::conj(vb) * std::conj(f.wvbar) -
            std::conj(mu_b) * std::conj(f.wv);
  return P;
}

}  // namespace detail

/// Second variation at z = 0 in the curvature + covariant-derivative form:
///   d2E/dz^a dzbar^b = -2 int R(du_v, V_a, du_vbar, V_bbar) dA
///                      + 2 int g(P_b, Q_a) dA.
/// Returns the total and the curvature part separately.
struct SecondVariationTerms {
  Complex total;
  Complex curvature_term;
  Complex gradient_term;
};

inline SecondVariationTerms second_variation_formula(
    const QuotientMesh& mesh, const DeformationChart& chart, const TargetGeometry& target,
    const MapField& base, const std::array<VelocityPair, 3>& vel, int a, int b) {
  Complex curv(0, 0), grad(0, 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto fa = detail::gather_fields(mesh, base, &vel[a], t);
    const auto fb = detail::gather_fields(mesh, base, &vel[b], t);
    const Complex mu_a = chart.mu_bary[t][a];
    const Complex mu_b = chart.mu_bary[t][b];
    const double w3 = mesh.tri_area[t] / 3.0;

    for (int q = 0; q < 3; ++q) {
      const Complex w = detail::interp(fa.w, q);

      // Curvature term: fields interpolated to the quadrature node.
      const ComplexTangent X1 = detail::du_v(fa);
      const ComplexTangent X3 = detail::du_vbar(fa);
      const ComplexTangent Va{detail::interp(fa.vc[0], q),
                              std::conj(detail::interp(fa.vc[1], q))};
      const ComplexTangent Vbbar{detail::interp(fb.vc[1], q),
                                 std::conj(detail::interp(fb.vc[0], q))};
      curv += w3 * 2.0 * target.riemann(w, X1, Va, X3, Vbbar);

      const ComplexTangent Q = detail::q_tangent(
          target, fa, w, detail::interp(fa.vc[0], q), detail::interp(fa.vc[1], q),
          fa.vvbar[0], fa.vv[1], mu_a);
      const ComplexTangent P = detail::p_tangent(
          target, fb, w, detail::interp(fb.vc[0], q), detail::interp(fb.vc[1], q),
          fb.vv[1], fb.vvbar[0], mu_b);
      grad += w3 * 2.0 * target.metric(w, P, Q);
    }
  }
  SecondVariationTerms out;
  out.curvature_term = -2.0 * curv;
  out.gradient_term = 2.0 * grad;
  out.total = out.curvature_term + out.gradient_term;
  return out;
}

/// Direct route to the same Hessian entry: differentiate the discrete
/// first-variation formula once more, keeping the solution-velocity chain
/// explicit.  Independent of the covariant-derivative bookkeeping above.
inline Complex energy_hessian_direct(const QuotientMesh& mesh, const DeformationChart& chart,
                                     const TargetGeometry& target, const MapField& base,
                                     const std::array<VelocityPair, 3>& vel, int a, int b) {
  Complex sum(0, 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto f = detail::gather_fields(mesh, base, &vel[b], t);
    const Complex mu_a = chart.mu_bary[t][a];
    const Complex mu_b = chart.mu_bary[t][b];
    const double area = mesh.tri_area[t];

    double S = 0.0;
    Complex dS(0, 0);
    for (int q = 0; q < 3; ++q) {
      const Complex w = detail::interp(f.w, q);
      S += target.energy_coefficient(w);
      const Complex cbar = target.energy_coefficient_dwbar(w);
      // dc along zbar^b: dw = V_bbar, dwbar = conj(V_b).
      dS += std::conj(cbar) * detail::interp(f.vc[1], q) +
            cbar * std::conj(detail::interp(f.vc[0], q));
    }
    S /= 3.0;
    dS /= 3.0;

    const double N = std::norm(f.wv) + std::norm(f.wvbar);
    const Complex expl = 2.0 * N * mu_a * std::conj(mu_b);
    const Complex chain =
        -2.0 * mu_a * (f.vv[1] * std::conj(f.wvbar) + f.wv * std::conj(f.vvbar[0]));
    const Complex d_alpha = -2.0 * mu_a * f.wv * std::conj(f.wvbar);
    sum += 2.0 * area * (S * (expl + chain) + d_alpha * dS);
  }
  return sum;
}

inline CauchySchwarzSides cauchy_schwarz_sides(const QuotientMesh& mesh,
                                               const DeformationChart& chart,
                                               const TargetGeometry& target,
                                               const MapField& base,
                                               const std::array<VelocityPair, 3>& vel,
                                               const Eigen::Vector3cd& xi) {
  CauchySchwarzSides out;
  const Eigen::Vector3cd dE = first_variation_formula(mesh, chart, target, base);
  out.lhs = std::norm(xi.transpose() * dE);

  double energy = 0.0, pnorm = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    std::array<detail::TriangleFields, 3> f;
    for (int b = 0; b < 3; ++b) f[b] = detail::gather_fields(mesh, base, &vel[b], t);
    const double w3 = mesh.tri_area[t] / 3.0;
    for (int q = 0; q < 3; ++q) {
      const Complex w = detail::interp(f[0].w, q);
      const double rho = target.rho(w);
      // Energy density g_ij u_v u_vbar against sqrt(-1) dv dvbar.
      energy += w3 * 2.0 * 0.5 * rho * (std::norm(f[0].wv) + std::norm(f[0].wvbar));
      ComplexTangent P{Complex(0, 0), Complex(0, 0)};
      for (int b = 0; b < 3; ++b) {
        const ComplexTangent Pb = detail::p_tangent(
            target, f[b], w, detail::interp(f[b].vc[0], q), detail::interp(f[b].vc[1], q),
            f[b].vv[1], f[b].vvbar[0], chart.mu_bary[t][b]);
        P.cw += std::conj(xi(b)) * Pb.cw;
        P.cwbar += std::conj(xi(b)) * Pb.cwbar;
      }
      pnorm += w3 * 2.0 * 0.5 * rho * (std::norm(P.cw) + std::norm(P.cwbar));
    }
  }
  out.rhs = energy * pnorm;
  return out;
}

/// Holomorphic energy density g_ij u^i_v conj(u^j_v) phi^{v vbar} sampled at
/// the quadrature points; constant (= E / 4 pi) for holomorphic totally
/// geodesic maps.
struct DensityCheck {
  double max_deviation = 0.0;
  double mean = 0.0;
};

inline DensityCheck constant_density_check(const QuotientMesh& mesh,
                                           const TargetGeometry& target,
                                           const MapField& map) {
  std::vector<double> density(mesh.num_quad_points());
  double mean = 0.0, area = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto f = detail::gather_fields(mesh, map, nullptr, t);
    for (int q = 0; q < 3; ++q) {
      const Complex x = mesh.tri_quad[t][q];
      const Complex w = detail::interp(f.w, q);
      const double d =
          target.energy_coefficient(w) * std::norm(f.wv) / density_phi(x);
      density[3 * t + q] = d;
      const double wgt = mesh.tri_area[t] / 3.0 * 2.0 * density_phi(x);
      mean += wgt * d;
      area += wgt;
    }
  }
  DensityCheck out;
  out.mean = mean / area;
  for (double d : density) out.max_deviation = std::max(out.max_deviation, std::abs(d - out.mean));
  return out;
}

}  // namespace teichlab
