#pragma once

// Energy functional and harmonic-map solvers on the deformed structures.
//
// Maps are stored by quotient dof.  Crossing a glued edge acts on the
// target: by the deck transformation for the hyperbolic target (identity
// homotopy class) and by an integer period shift for the flat torus.
//
// The energy of a piecewise-linear map w against the structure mu is
//   E = sum_T 2 |T| (|A|^2 + |B|^2) / (1 - |mu_T|^2) * mean_q c(w(x_q)),
//   A = w_v - conj(mu) w_vbar,  B = w_vbar - mu w_v,
// with c the target's conformal coefficient (c = 1/2 flat, 2/(1-|w|^2)^2
// hyperbolic).  For the flat target this is exactly the quadratic form of
// the assembled stiffness, which the linear solver uses directly.

#include <Eigen/SparseCholesky>

#include "teichlab/deformation.hpp"
#include "teichlab/target_geometry.hpp"

namespace teichlab {

struct TorusPeriods {
  std::array<std::array<int, 2>, 4> c{};  // integer period per generator class

  Complex shift(const std::array<int, 4>& counts) const {
    double x = 0, y = 0;
    for (int k = 0; k < 4; ++k) {
      x += counts[k] * c[k][0];
      y += counts[k] * c[k][1];
    }
    return {x, y};
  }

  bool trivial() const {
    for (const auto& p : c)
      if (p[0] != 0 || p[1] != 0) return false;
    return true;
  }
};

struct MapField {
  TargetKind target = TargetKind::Hyperbolic;
  std::vector<Complex> values;  // per quotient dof
  TorusPeriods periods{};       // torus homotopy data
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Value of the map at a vertex instance (deck action on slave corners).
inline Complex map_vertex_value(const QuotientMesh& mesh, const MapField& map, int vertex) {
  const Complex x = map.values[mesh.vertex_dof[vertex]];
  if (map.target == TargetKind::Hyperbolic) {
    if (mesh.vertex_word[vertex].empty()) return x;
    return mesh.vertex_deck[vertex].apply(x);
  }
  return x + map.periods.shift(mesh.vertex_shift[vertex]);
}

/// Identity map in the trivial gauge: dof values are the master positions.
inline MapField identity_map(const QuotientMesh& mesh) {
  MapField map;
  map.target = TargetKind::Hyperbolic;
  map.values.resize(mesh.num_dofs);
  for (int d = 0; d < mesh.num_dofs; ++d)
    map.values[d] = mesh.vertex_position[mesh.dof_vertex[d]];
  return map;
}

inline MapField constant_torus_map(const QuotientMesh& mesh, TorusPeriods periods = {}) {
  MapField map;
  map.target = TargetKind::FlatTorus;
  map.values.assign(mesh.num_dofs, Complex(0, 0));
  map.periods = periods;
  return map;
}

namespace detail {

struct TriangleCorners {
  std::array<Complex, 3> w;
  // Values at the three edge-midpoint quadrature nodes (PL interpolation).
  Complex at_quad(int q) const { return 0.5 * (w[q] + w[(q + 1) % 3]); }
};

inline TriangleCorners gather_corners(const QuotientMesh& mesh, const MapField& map,
                                      std::size_t t) {
  TriangleCorners c;
  for (int k = 0; k < 3; ++k) c.w[k] = map_vertex_value(mesh, map, mesh.triangles[t][k]);
  return c;
}

// Hat-function weight of corner c at quadrature node q (edge midpoints).
inline double quad_weight(int c, int q) {
  return (c == q || c == (q + 1) % 3) ? 0.5 : 0.0;
}

}  // namespace detail

inline double map_energy(const QuotientMesh& mesh, const ConformalStructure& cs,
                         const TargetGeometry& target, const MapField& map) {
  double E = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto corners = detail::gather_corners(mesh, map, t);
    const Complex mu = cs.mu[t];
    Complex wv(0, 0), wvbar(0, 0);
    for (int c = 0; c < 3; ++c) {
      wv += mesh.tri_dv_coeff[t][c] * corners.w[c];
      wvbar += std::conj(mesh.tri_dv_coeff[t][c]) * corners.w[c];
    }
    const Complex A = wv - std::conj(mu) * wvbar;
    const Complex B = wvbar - mu * wv;
    double S = 0.0;
    for (int q = 0; q < 3; ++q) S += target.energy_coefficient(corners.at_quad(q));
    S /= 3.0;
    E += 2.0 * mesh.tri_area[t] * (std::norm(A) + std::norm(B)) / (1.0 - std::norm(mu)) * S;
  }
  return E;
}

/// Complex gradient per dof, convention g = 2 dE/d(conj x).
inline std::vector<Complex> map_energy_gradient(const QuotientMesh& mesh,
                                                const ConformalStructure& cs,
                                                const TargetGeometry& target,
                                                const MapField& map) {
  std::vector<Complex> grad(mesh.num_dofs, Complex(0, 0));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto corners = detail::gather_corners(mesh, map, t);
    const Complex mu = cs.mu[t];
    const double common = 2.0 * mesh.tri_area[t] / (1.0 - std::norm(mu));

    std::array<Complex, 3> alpha, beta;
    Complex A(0, 0), B(0, 0);
    for (int c = 0; c < 3; ++c) {
      const Complex a = mesh.tri_dv_coeff[t][c];
      alpha[c] = a - std::conj(mu) * std::conj(a);
      beta[c] = std::conj(a) - mu * a;
      A += alpha[c] * corners.w[c];
      B += beta[c] * corners.w[c];
    }
    const double D = std::norm(A) + std::norm(B);

    double S = 0.0;
    std::array<Complex, 3> dc{};
    for (int q = 0; q < 3; ++q) {
      const Complex wq = corners.at_quad(q);
      S += target.energy_coefficient(wq);
      dc[q] = target.energy_coefficient_dwbar(wq);
    }
    S /= 3.0;

    for (int c = 0; c < 3; ++c) {
      Complex cterm(0, 0);
      for (int q = 0; q < 3; ++q) cterm += dc[q] * detail::quad_weight(c, q);
      const Complex dEdwbar =
          common * ((A * std::conj(alpha[c]) + B * std::conj(beta[c])) * S + D * cterm / 3.0);
      Complex g_corner = 2.0 * dEdwbar;

      const int vertex = mesh.triangles[t][c];
      const int dof = mesh.vertex_dof[vertex];
      if (map.target == TargetKind::Hyperbolic && !mesh.vertex_word[vertex].empty())
        g_corner *= std::conj(mesh.vertex_deck[vertex].derivative(map.values[dof]));
      grad[dof] += g_corner;
    }
  }
  return grad;
}

/// Solver workspace bound to one mesh and target: the dual-norm metric
/// P = (c-weighted Laplacian at the base structure) + sigma I, prefactored,
/// plus the reduced-stiffness pattern for the linear flat-target solves.
class HarmonicContext {
 public:
  HarmonicContext(const QuotientMesh& mesh, TargetKind kind) : mesh_(&mesh) {
    target_.kind = kind;

    // Weighted Laplacian: element conductivity 2 * mean c at the base map
    // (identity positions for the hyperbolic target, 1/2 flat), plus a
    // diagonal shift to make P definite on the constants.
    const MapField base =
        kind == TargetKind::Hyperbolic ? identity_map(mesh) : constant_torus_map(mesh);
    std::vector<Eigen::Triplet<double>> trip;
    double diag_scale = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto corners = detail::gather_corners(mesh, base, t);
      double S = 0.0;
      for (int q = 0; q < 3; ++q) S += target_.energy_coefficient(corners.at_quad(q));
      S /= 3.0;
      std::array<Eigen::Vector2d, 3> g;
      for (int c = 0; c < 3; ++c) {
        const Complex a = mesh.tri_dv_coeff[t][c];
        g[c] = Eigen::Vector2d(2.0 * a.real(), -2.0 * a.imag());
      }
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          const double val = 2.0 * S * mesh.tri_area[t] * g[c].dot(g[d]);
          trip.emplace_back(mesh.vertex_dof[mesh.triangles[t][c]],
                            mesh.vertex_dof[mesh.triangles[t][d]], val);
          if (c == d) diag_scale += val;
        }
    }
    const double sigma = 0.05 * diag_scale / mesh.num_dofs;
    for (int i = 0; i < mesh.num_dofs; ++i) trip.emplace_back(i, i, sigma);
    P_.resize(mesh.num_dofs, mesh.num_dofs);
    P_.setFromTriplets(trip.begin(), trip.end());
    P_solver_.compute(P_);
    if (P_solver_.info() != Eigen::Success)
      throw Error(ErrorCode::solver_divergence, "dual metric factorization failed");
  }

  const QuotientMesh& mesh() const { return *mesh_; }
  const TargetGeometry& target() const { return target_; }

  std::vector<Complex> dual_apply_inverse(const std::vector<Complex>& g) const {
    Eigen::VectorXd gx(mesh_->num_dofs), gy(mesh_->num_dofs);
    for (int i = 0; i < mesh_->num_dofs; ++i) {
      gx(i) = g[i].real();
      gy(i) = g[i].imag();
    }
    const Eigen::VectorXd px = P_solver_.solve(gx), py = P_solver_.solve(gy);
    std::vector<Complex> out(mesh_->num_dofs);
    for (int i = 0; i < mesh_->num_dofs; ++i) out[i] = Complex(px(i), py(i));
    return out;
  }

  static double pairing(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
  }

  /// Scale-normalized dual-norm residual (g^T P^{-1} g) / E.
  double residual(const ConformalStructure& cs, const MapField& map) const {
    const auto g = map_energy_gradient(*mesh_, cs, target_, map);
    const double E = map_energy(*mesh_, cs, target_, map);
    return pairing(g, dual_apply_inverse(g)) / std::max(E, 1e-300);
  }

 private:
  const QuotientMesh* mesh_;
  TargetGeometry target_;
  Eigen::SparseMatrix<double> P_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> P_solver_;
};

inline double harmonic_residual(const HarmonicContext& ctx, const ConformalStructure& cs,
                                const MapField& map) {
  return ctx.residual(cs, map);
}

/// Linear solve for the flat-torus harmonic map with the given periods.
/// Unique up to an additive constant; gauge-fixed to mean zero.
class TorusSolver {
 public:
  explicit TorusSolver(const QuotientMesh& mesh) : mesh_(&mesh) {
    // The reduced pattern (dof 0 pinned) is structure-independent.
    const ConformalStructure flat{std::vector<Complex>(mesh.num_triangles(), Complex(0, 0)),
                                  0.0};
    solver_.analyzePattern(reduced(assemble_stiffness(mesh, flat.tensors())));
  }

  MapField solve(const ConformalStructure& cs, const TorusPeriods& periods) {
    const QuotientMesh& mesh = *mesh_;
    const Eigen::SparseMatrix<double> K = assemble_stiffness(mesh, cs.tensors());

    // Jump loads: gradient of the energy at x = 0 from the period shifts.
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(mesh.num_dofs);
    Eigen::VectorXd by = Eigen::VectorXd::Zero(mesh.num_dofs);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const Eigen::Matrix2d C = conformal_conductivity(cs.tensor(t));
      std::array<Eigen::Vector2d, 3> g;
      std::array<Complex, 3> shift;
      for (int c = 0; c < 3; ++c) {
        const Complex a = mesh.tri_dv_coeff[t][c];
        g[c] = Eigen::Vector2d(2.0 * a.real(), -2.0 * a.imag());
        shift[c] = periods.shift(mesh.vertex_shift[mesh.triangles[t][c]]);
      }
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          const double k = mesh.tri_area[t] * g[c].dot(C * g[d]);
          bx(mesh.vertex_dof[mesh.triangles[t][c]]) += k * shift[d].real();
          by(mesh.vertex_dof[mesh.triangles[t][c]]) += k * shift[d].imag();
        }
    }

    solver_.factorize(reduced(K));
    if (solver_.info() != Eigen::Success)
      throw Error(ErrorCode::solver_divergence, "stiffness factorization failed");
    const Eigen::VectorXd ux = solver_.solve(-bx.tail(mesh.num_dofs - 1));
    const Eigen::VectorXd uy = solver_.solve(-by.tail(mesh.num_dofs - 1));

    MapField map = constant_torus_map(mesh, periods);
    for (int i = 1; i < mesh.num_dofs; ++i) map.values[i] = Complex(ux(i - 1), uy(i - 1));
    Complex mean(0, 0);
    for (const Complex& v : map.values) mean += v;
    mean /= static_cast<double>(mesh.num_dofs);
    for (Complex& v : map.values) v -= mean;

    TargetGeometry target{TargetKind::FlatTorus};
    map.energy = map_energy(mesh, cs, target, map);
    map.iterations = 1;
    return map;
  }

 private:
  static Eigen::SparseMatrix<double> reduced(const Eigen::SparseMatrix<double>& K) {
    return K.bottomRightCorner(K.rows() - 1, K.cols() - 1);
  }

  const QuotientMesh* mesh_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

struct SolveOptions {
  double tol = 1e-12;       // stop when (g^T P^{-1} g) <= tol * E
  int max_iterations = 4000;
  double armijo = 1e-4;
};

/// Preconditioned nonlinear conjugate gradient (Polak-Ribiere) with Armijo
/// backtracking and geodesic retraction; energy decreases monotonically.
inline MapField solve_hyperbolic(const HarmonicContext& ctx, const ConformalStructure& cs,
                                 const MapField& initial, const SolveOptions& opt = {}) {
  if (initial.target != TargetKind::Hyperbolic)
    throw Error(ErrorCode::invalid_argument, "initial map has the wrong target");
  if (cs.sup_mu > 0.5)
    throw Error(ErrorCode::out_of_chart, "structure too far from the base point");

  const QuotientMesh& mesh = ctx.mesh();
  MapField map = initial;
  map.target = TargetKind::Hyperbolic;

  double E = map_energy(mesh, cs, ctx.target(), map);
  std::vector<Complex> dir(mesh.num_dofs, Complex(0, 0));
  std::vector<Complex> prev_pg;
  double prev_r2 = 0.0;
  double step = 1.0;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const auto g = map_energy_gradient(mesh, cs, ctx.target(), map);
    const auto pg = ctx.dual_apply_inverse(g);
    const double r2 = HarmonicContext::pairing(g, pg);
    if (r2 <= opt.tol * std::max(E, 1e-300)) {
      map.energy = E;
      map.residual = r2 / std::max(E, 1e-300);
      map.iterations = iter;
      return map;
    }

    double beta = 0.0;
    if (iter > 0 && prev_r2 > 0.0) {
      beta = std::max(0.0, (r2 - HarmonicContext::pairing(g, prev_pg)) / prev_r2);
    }
    double slope = 0.0;
    for (int i = 0; i < mesh.num_dofs; ++i) {
      dir[i] = -pg[i] + beta * dir[i];
      slope += g[i].real() * dir[i].real() + g[i].imag() * dir[i].imag();
    }
    if (slope >= 0.0) {  // restart on loss of descent
      slope = 0.0;
      for (int i = 0; i < mesh.num_dofs; ++i) {
        dir[i] = -pg[i];
        slope += g[i].real() * dir[i].real() + g[i].imag() * dir[i].imag();
      }
    }
    prev_pg = pg;
    prev_r2 = r2;

    MapField trial = map;
    double t = std::min(2.0 * step, 4.0);
    bool accepted = false;
    double Et = E;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < mesh.num_dofs; ++i)
        trial.values[i] =
            disk_exp(map.values[i], coordinate_to_tangent(map.values[i], t * dir[i]));
      Et = map_energy(mesh, cs, ctx.target(), trial);
      if (Et <= E + opt.armijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw Error(ErrorCode::line_search_failure, "Armijo search failed to make progress");
    step = t;
    map.values.swap(trial.values);
    E = Et;

    for (const Complex& v : map.values)
      if (std::abs(v) > 1.0 - 1e-6)
        throw Error(ErrorCode::solver_divergence, "map approached the disk boundary");
  }
  throw Error(ErrorCode::max_iterations_exceeded, "nonlinear solver did not converge");
}

// ---- velocity fields (central complex differences of solved maps) ----

/// d/dz^a and d/dzbar^a of the solved family, coordinate frame along the
/// base map.  Assemble from the four solves z0 +- h e_a, z0 +- i h e_a.
struct VelocityPair {
  std::vector<Complex> v;     // d u / d z^a
  std::vector<Complex> vbar;  // d u / d zbar^a
};

/// Difference quotient (u_plus - u_minus) / (2h) in the tangent space of
/// the base map (disk logarithm for the hyperbolic target).
inline std::vector<Complex> map_difference(const QuotientMesh& mesh, const MapField& base,
                                           const MapField& plus, const MapField& minus,
                                           double h) {
  std::vector<Complex> out(mesh.num_dofs);
  for (int i = 0; i < mesh.num_dofs; ++i) {
    if (base.target == TargetKind::Hyperbolic) {
      const Complex lp = disk_log(base.values[i], plus.values[i]);
      const Complex lm = disk_log(base.values[i], minus.values[i]);
      out[i] = tangent_to_coordinate(base.values[i], (lp - lm) / (2.0 * h));
    } else {
      out[i] = (plus.values[i] - minus.values[i]) / (2.0 * h);
    }
  }
  return out;
}

inline VelocityPair velocity_from_differences(const std::vector<Complex>& dre,
                                              const std::vector<Complex>& dim) {
  VelocityPair out;
  const std::size_t n = dre.size();
  out.v.resize(n);
  out.vbar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = 0.5 * (dre[i] - Complex(0, 1) * dim[i]);
    out.vbar[i] = 0.5 * (dre[i] + Complex(0, 1) * dim[i]);
  }
  return out;
}

inline VelocityPair richardson(const VelocityPair& at_h, const VelocityPair& at_h2) {
  VelocityPair out;
  const std::size_t n = at_h.v.size();
  out.v.resize(n);
  out.vbar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = (4.0 * at_h2.v[i] - at_h.v[i]) / 3.0;
    out.vbar[i] = (4.0 * at_h2.vbar[i] - at_h.vbar[i]) / 3.0;
  }
  return out;
}

/// Velocity at a vertex instance: deck pushforward on slave corners.
inline Complex velocity_vertex_value(const QuotientMesh& mesh, const MapField& base,
                                     const std::vector<Complex>& field, int vertex) {
  const int dof = mesh.vertex_dof[vertex];
  if (base.target == TargetKind::Hyperbolic && !mesh.vertex_word[vertex].empty())
    return mesh.vertex_deck[vertex].derivative(base.values[dof]) * field[dof];
  return field[dof];
}

}  // namespace teichlab
