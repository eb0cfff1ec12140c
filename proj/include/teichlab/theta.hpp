#pragma once

// Holomorphic quadratic differentials on the Bolza surface via truncated
// Poincare series Theta_P(v) = sum_gamma gamma'(v)^2 P(gamma v), their
// harmonic Beltrami representatives mu = phi^{-1} conj(q), and the
// Weil-Petersson Gram matrix
//   G_{ab} = int mu_a conj(mu_b) sqrt(-1) phi dv ^ dvbar.
//
// Series truncation error is measured empirically by comparing partial sums
// at nested radii; the same snapshots feed the radius-stability checks.

#include <memory>
#include <numeric>

#include <Eigen/Dense>

#include "teichlab/mesh.hpp"

namespace teichlab {

/// Per-seed partial sums of the series at the snapshot radii.
/// value[r][s][i]: snapshot r, monomial seed v^s, point i.
struct SeedTable {
  std::vector<double> radii;
  std::vector<std::vector<std::vector<Complex>>> value;

  const std::vector<std::vector<Complex>>& at_radius(double R) const {
    for (std::size_t r = 0; r < radii.size(); ++r)
      if (std::abs(radii[r] - R) < 1e-9) return value[r];
    throw Error(ErrorCode::invalid_argument, "no snapshot at requested radius");
  }
};

/// Evaluate Theta for monomial seeds 1, v, ..., v^{nseeds-1} at the given
/// points, recording partial sums at each snapshot radius.
inline SeedTable theta_table(const GroupBall& ball, std::span<const Complex> pts,
                             int nseeds, std::vector<double> snap_radii) {
  std::sort(snap_radii.begin(), snap_radii.end());
  if (snap_radii.empty() || snap_radii.back() > ball.radius + 1e-9)
    throw Error(ErrorCode::invalid_argument, "snapshot radii must end within the ball");

  const std::size_t n = ball.size();
  std::vector<std::size_t> breaks;
  for (double r : snap_radii) breaks.push_back(ball.count_within(r));

  // Structure-of-arrays layout for the inner loop.
  std::vector<double> ar(n), ai(n), br(n), bi(n);
  for (std::size_t g = 0; g < n; ++g) {
    ar[g] = ball.elements[g].a.real();
    ai[g] = ball.elements[g].a.imag();
    br[g] = ball.elements[g].b.real();
    bi[g] = ball.elements[g].b.imag();
  }

  SeedTable table;
  table.radii = snap_radii;
  table.value.assign(snap_radii.size(),
                     std::vector<std::vector<Complex>>(
                         nseeds, std::vector<Complex>(pts.size())));

  std::vector<Complex> acc(nseeds);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double vr = pts[i].real(), vi = pts[i].imag();
    std::fill(acc.begin(), acc.end(), Complex(0, 0));
    std::size_t next_break = 0;
    for (std::size_t g = 0; g < n; ++g) {
      while (next_break < breaks.size() && g == breaks[next_break]) {
        for (int s = 0; s < nseeds; ++s) table.value[next_break][s][i] = acc[s];
        ++next_break;
      }
      // w = gamma(v), g4 = gamma'(v)^2 = 1/(conj(b) v + conj(a))^4.
      const double nr = ar[g] * vr - ai[g] * vi + br[g];
      const double ni = ar[g] * vi + ai[g] * vr + bi[g];
      const double dr = br[g] * vr + bi[g] * vi + ar[g];
      const double di = br[g] * vi - bi[g] * vr - ai[g];
      const double inv = 1.0 / (dr * dr + di * di);
      const double idr = dr * inv, idi = -di * inv;  // 1/d
      const double wr = nr * idr - ni * idi;
      const double wi = nr * idi + ni * idr;
      const double g2r = idr * idr - idi * idi;
      const double g2i = 2.0 * idr * idi;
      double tr = g2r * g2r - g2i * g2i;  // gamma'(v)^2
      double ti = 2.0 * g2r * g2i;
      acc[0] += Complex(tr, ti);
      for (int s = 1; s < nseeds; ++s) {
        const double ur = tr * wr - ti * wi;
        const double ui = tr * wi + ti * wr;
        tr = ur;
        ti = ui;
        acc[s] += Complex(tr, ti);
      }
    }
    for (std::size_t r = next_break; r < breaks.size(); ++r)
      for (int s = 0; s < nseeds; ++s) table.value[r][s][i] = acc[s];
  }
  return table;
}

/// Weight-4 automorphic holomorphic field built from a polynomial seed.
struct QuadraticDifferential {
  std::shared_ptr<const GroupBall> ball;
  std::vector<Complex> poly;  // seed coefficients, ascending powers
  double radius = 0.0;        // truncation radius used by eval

  Complex eval(const Complex& v) const {
    const std::size_t n = ball->count_within(radius);
    Complex sum(0, 0);
    for (std::size_t g = 0; g < n; ++g) {
      const MobiusTransform& m = ball->elements[g];
      const Complex w = m.apply(v);
      const Complex d1 = m.derivative(v);
      Complex p(0, 0);
      for (auto it = poly.rbegin(); it != poly.rend(); ++it) p = p * w + *it;
      sum += d1 * d1 * p;
    }
    return sum;
  }
};

inline QuadraticDifferential poincare_series(std::shared_ptr<const GroupBall> ball,
                                             std::vector<Complex> poly) {
  if (!ball || ball->radius < 8.0 - 1e-9)
    throw Error(ErrorCode::invalid_argument, "series needs a ball of radius >= 8");
  QuadraticDifferential q;
  q.ball = std::move(ball);
  q.poly = std::move(poly);
  q.radius = q.ball->radius;
  return q;
}

/// Harmonic Beltrami representative mu(v) = (1-|v|^2)^2/2 * conj(q(v)).
inline Complex beltrami_from_quadratic(const Complex& v, const Complex& qv) {
  return std::conj(qv) / density_phi(v);
}

struct BeltramiDifferential {
  QuadraticDifferential q;
  double sup_norm = 0.0;  // sampled sup |mu|, recorded by the caller

  Complex eval(const Complex& v) const { return beltrami_from_quadratic(v, q.eval(v)); }
};

inline BeltramiDifferential harmonic_beltrami(QuadraticDifferential q) {
  return BeltramiDifferential{std::move(q), 0.0};
}

/// WP-orthonormal basis of the three quadratic differentials, stored as
/// coefficient rows over the monomial seeds together with cached values on
/// the construction mesh.
struct DifferentialBasis {
  std::shared_ptr<const GroupBall> ball;
  int nseeds = 5;
  double series_radius = 0.0;
  Eigen::Matrix<Complex, 3, Eigen::Dynamic> coeff;  // 3 x nseeds rows
  Eigen::Matrix<std::complex<double>, 5, 5> raw_gram;  // monomial seeds, quadrature
  std::array<int, 3> pivots{};

  std::array<double, 3> sup_mu{};  // sampled over the construction points
  double chart_radius = 0.0;       // r_max: sup |mu(z)| <= 0.2 for |z|_inf <= r_max
  double tail = 0.0;               // normalized |q_R - q_{R-2}| over samples

  std::array<Complex, 3> q_at(const Complex& v) const {
    std::array<Complex, 3> out{};
    // One ball sweep for all seeds.
    const std::size_t n = ball->count_within(series_radius);
    std::array<Complex, 8> seed_vals{};
    for (std::size_t g = 0; g < n; ++g) {
      const MobiusTransform& m = ball->elements[g];
      const Complex w = m.apply(v);
      const Complex d1 = m.derivative(v);
      Complex t = d1 * d1;
      seed_vals[0] += t;
      for (int s = 1; s < nseeds; ++s) {
        t *= w;
        seed_vals[s] += t;
      }
    }
    for (int a = 0; a < 3; ++a) {
      Complex sum(0, 0);
      for (int s = 0; s < nseeds; ++s) sum += coeff(a, s) * seed_vals[s];
      out[a] = sum;
    }
    return out;
  }

  std::array<Complex, 3> mu_at(const Complex& v) const {
    std::array<Complex, 3> qs = q_at(v);
    std::array<Complex, 3> out;
    for (int a = 0; a < 3; ++a) out[a] = beltrami_from_quadratic(v, qs[a]);
    return out;
  }
};

/// Combine a seed table snapshot into per-point basis values.
/// Returns q-values; mu follows via beltrami_from_quadratic.
inline std::vector<std::array<Complex, 3>> combine_basis(
    const DifferentialBasis& basis, const std::vector<std::vector<Complex>>& seed_values) {
  const std::size_t npts = seed_values.at(0).size();
  std::vector<std::array<Complex, 3>> out(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    for (int a = 0; a < 3; ++a) {
      Complex sum(0, 0);
      for (int s = 0; s < basis.nseeds; ++s) sum += basis.coeff(a, s) * seed_values[s][i];
      out[i][a] = sum;
    }
  }
  return out;
}

inline std::vector<std::array<Complex, 3>> mu_from_q(
    std::span<const Complex> pts, const std::vector<std::array<Complex, 3>>& qvals) {
  std::vector<std::array<Complex, 3>> mu(qvals.size());
  for (std::size_t i = 0; i < qvals.size(); ++i)
    for (int a = 0; a < 3; ++a) mu[i][a] = beltrami_from_quadratic(pts[i], qvals[i][a]);
  return mu;
}

/// Hermitian WP Gram of arbitrary Beltrami values sampled at the mesh
/// quadrature points: G_ab = sum w_q mu_a conj(mu_b) 2 phi.
template <int N>
inline Eigen::Matrix<Complex, N, N> wp_gram_from_mu(
    const QuotientMesh& mesh, const std::vector<std::array<Complex, N>>& mu) {
  Eigen::Matrix<Complex, N, N> G = Eigen::Matrix<Complex, N, N>::Zero();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double w = mesh.tri_area[t] / 3.0;
    for (int q = 0; q < 3; ++q) {
      const std::size_t i = 3 * t + q;
      const double weight = w * 2.0 * density_phi(mesh.tri_quad[t][q]);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) G(a, b) += weight * mu[i][a] * std::conj(mu[i][b]);
    }
  }
  // Symmetrize away quadrature round-off.
  return 0.5 * (G + G.adjoint().eval());
}

inline Eigen::Matrix3cd wp_gram(const QuotientMesh& mesh,
                                const std::vector<std::array<Complex, 3>>& mu) {
  return wp_gram_from_mu<3>(mesh, mu);
}

/// Build the orthonormal basis on the given mesh.  Seeds 1, v, ..., v^4 are
/// reduced to three independent directions by greedy pivoting on the raw
/// Gram, then Gram-Schmidt orthonormalized in the WP inner product.
inline DifferentialBasis build_basis(std::shared_ptr<const GroupBall> ball,
                                     const QuotientMesh& mesh) {
  DifferentialBasis basis;
  basis.ball = ball;
  basis.series_radius = ball->radius;
  basis.nseeds = 5;

  std::vector<Complex> pts(mesh.num_quad_points());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (int q = 0; q < 3; ++q) pts[3 * t + q] = mesh.tri_quad[t][q];

  const double R = ball->radius;
  SeedTable table = theta_table(*ball, pts, basis.nseeds, {R - 2.0, R});
  const auto& seed_q = table.at_radius(R);

  // Raw 5x5 Gram over the monomial seeds.
  Eigen::Matrix<Complex, 5, 5> H = Eigen::Matrix<Complex, 5, 5>::Zero();
  {
    std::vector<std::array<Complex, 5>> mu5(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (int s = 0; s < 5; ++s) mu5[i][s] = beltrami_from_quadratic(pts[i], seed_q[s][i]);
    H = wp_gram_from_mu<5>(mesh, mu5);
  }
  basis.raw_gram = H;

  // Greedy pivoted Gram-Schmidt in the H-inner-product.
  const double max_diag = H.diagonal().real().maxCoeff();
  std::vector<Eigen::Matrix<Complex, 5, 1>> rows;
  std::vector<int> used;
  auto hdot = [&](const Eigen::Matrix<Complex, 5, 1>& x,
                  const Eigen::Matrix<Complex, 5, 1>& y) {
    return (x.transpose() * H * y.conjugate())(0, 0);
  };
  for (int r = 0; r < 3; ++r) {
    int best = -1;
    double best_resid = 0.0;
    for (int s = 0; s < 5; ++s) {
      if (std::find(used.begin(), used.end(), s) != used.end()) continue;
      Eigen::Matrix<Complex, 5, 1> cand = Eigen::Matrix<Complex, 5, 1>::Zero();
      cand(s) = 1.0;
      for (const auto& row : rows) cand -= hdot(cand, row) * row;
      const double resid = hdot(cand, cand).real();
      if (resid > best_resid) {
        best_resid = resid;
        best = s;
      }
    }
    if (best < 0 || best_resid <= 1e-12 * max_diag)
      throw Error(ErrorCode::rank_deficient, "fewer than three independent differentials");
    Eigen::Matrix<Complex, 5, 1> row = Eigen::Matrix<Complex, 5, 1>::Zero();
    row(best) = 1.0;
    for (const auto& prev : rows) row -= hdot(row, prev) * prev;
    row /= std::sqrt(hdot(row, row).real());
    rows.push_back(row);
    used.push_back(best);
    basis.pivots[r] = best;
  }
  basis.coeff.resize(3, basis.nseeds);
  for (int a = 0; a < 3; ++a) basis.coeff.row(a) = rows[a].transpose();

  // Condition of the selected raw sub-Gram.
  Eigen::Matrix3cd sub;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) sub(a, b) = H(used[a], used[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(sub);
  if (es.eigenvalues()(0) <= 0 ||
      es.eigenvalues()(2) / es.eigenvalues()(0) >= 1e6)
    throw Error(ErrorCode::rank_deficient, "raw seed Gram nearly singular");

  // Sampled sup |mu_a| and the tail estimate from the R-2 snapshot.
  const auto qvals = combine_basis(basis, seed_q);
  const auto qprev = combine_basis(basis, table.at_radius(R - 2.0));
  double qscale = 0.0, jump = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      basis.sup_mu[a] = std::max(basis.sup_mu[a],
                                 std::abs(beltrami_from_quadratic(pts[i], qvals[i][a])));
      qscale = std::max(qscale, std::abs(qvals[i][a]));
      jump = std::max(jump, std::abs(qvals[i][a] - qprev[i][a]));
    }
  }
  basis.tail = jump / qscale;
  basis.chart_radius = 0.2 / (basis.sup_mu[0] + basis.sup_mu[1] + basis.sup_mu[2]);
  return basis;
}

}  // namespace teichlab
