#pragma once

// Local chart z -> mu(z) = sum_a z^a mu_a around the base surface, and the
// induced conformal structure on the fixed mesh.  The chart radius keeps
// sup |mu(z)| <= 0.2, far from the degenerate |mu| = 1 regime.

#include "teichlab/theta.hpp"

namespace teichlab {

using TeichPoint = Eigen::Vector3cd;

/// Real quadratic form of |dv + mu dvbar|^2.
inline Eigen::Matrix2d beltrami_tensor(const Complex& mu) {
  const double n = std::norm(mu);
  Eigen::Matrix2d M;
  M << 1.0 + n + 2.0 * mu.real(), 2.0 * mu.imag(), 2.0 * mu.imag(), 1.0 + n - 2.0 * mu.real();
  return M;
}

/// Conformal structure sampled per triangle (barycenter values).
struct ConformalStructure {
  std::vector<Complex> mu;  // per triangle
  double sup_mu = 0.0;

  Eigen::Matrix2d tensor(std::size_t t) const { return beltrami_tensor(mu[t]); }

  std::vector<Eigen::Matrix2d> tensors() const {
    std::vector<Eigen::Matrix2d> out;
    out.reserve(mu.size());
    for (const Complex& m : mu) out.push_back(beltrami_tensor(m));
    return out;
  }
};

/// Chart data bound to one mesh: basis values at barycenters and quadrature
/// points, the WP Gram on this mesh, and the admissible radius.
struct DeformationChart {
  const QuotientMesh* mesh = nullptr;
  DifferentialBasis basis;
  std::vector<std::array<Complex, 3>> mu_bary;  // per triangle
  std::vector<std::array<Complex, 3>> mu_quad;  // per quadrature point
  Eigen::Matrix3cd gram;
  double r_max = 0.0;

  std::array<Complex, 3> direction_at_bary(std::size_t t) const { return mu_bary[t]; }
};

inline DeformationChart build_chart(const QuotientMesh& mesh, DifferentialBasis basis,
                                    double chart_radius_override = 0.0) {
  DeformationChart chart;
  chart.mesh = &mesh;
  chart.basis = std::move(basis);
  chart.r_max =
      chart_radius_override > 0.0 ? chart_radius_override : chart.basis.chart_radius;

  std::vector<Complex> pts;
  pts.reserve(mesh.num_quad_points() + mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (int q = 0; q < 3; ++q) pts.push_back(mesh.tri_quad[t][q]);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) pts.push_back(mesh.tri_barycenter[t]);

  SeedTable table = theta_table(*chart.basis.ball, pts, chart.basis.nseeds,
                                {chart.basis.series_radius});
  const auto qv = combine_basis(chart.basis, table.value[0]);
  chart.mu_quad.resize(mesh.num_quad_points());
  chart.mu_bary.resize(mesh.num_triangles());
  for (std::size_t i = 0; i < mesh.num_quad_points(); ++i)
    for (int a = 0; a < 3; ++a) chart.mu_quad[i][a] = beltrami_from_quadratic(pts[i], qv[i][a]);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const std::size_t i = mesh.num_quad_points() + t;
    for (int a = 0; a < 3; ++a) chart.mu_bary[t][a] = beltrami_from_quadratic(pts[i], qv[i][a]);
  }
  chart.gram = wp_gram(mesh, chart.mu_quad);
  return chart;
}

inline bool in_chart(const DeformationChart& chart, const TeichPoint& z) {
  return z.cwiseAbs().maxCoeff() <= chart.r_max + 1e-15;
}

/// mu(z) per triangle.  Complex-linear in z by construction.
inline ConformalStructure structure_at(const DeformationChart& chart, const TeichPoint& z) {
  if (!in_chart(chart, z))
    throw Error(ErrorCode::out_of_chart, "chart coordinate exceeds the admissible radius");
  ConformalStructure cs;
  cs.mu.resize(chart.mu_bary.size());
  for (std::size_t t = 0; t < chart.mu_bary.size(); ++t) {
    const auto& d = chart.mu_bary[t];
    cs.mu[t] = z(0) * d[0] + z(1) * d[1] + z(2) * d[2];
    cs.sup_mu = std::max(cs.sup_mu, std::abs(cs.mu[t]));
  }
  if (cs.sup_mu >= 0.5)
    throw Error(ErrorCode::out_of_chart, "deformed structure too far from the base point");
  return cs;
}

}  // namespace teichlab
