#pragma once

// Geodesic triangulation of the fundamental octagon with side gluing.
// Level 0 is the 16-triangle center/vertex/midpoint fan; each level splits
// every triangle by hyperbolic edge midpoints.  Triangles live in the
// Euclidean coordinate chart (piecewise-linear elements, three-point edge
// midpoint quadrature); only vertex placement uses hyperbolic geometry.
//
// Degrees of freedom live on the quotient: a boundary vertex stores the dof
// of its master representative together with the deck word carrying master
// values to this instance (u(gamma x) = gamma u(x) for equivariant targets,
// additive period shifts for flat targets).

#include <functional>
#include <map>
#include <ostream>
#include <span>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "teichlab/fuchsian.hpp"

namespace teichlab {

enum class AreaForm {
  Hyperbolic,  // sqrt(-1) phi dv ^ dvbar = 2 phi dx dy
  Euclidean,   // sqrt(-1) dv ^ dvbar = 2 dx dy
};

struct SeamSample {
  Complex slave_point;   // on side 4..7
  Complex master_point;  // = g_{k-4}(slave_point)
  int slave_side;
};

struct QuotientMesh {
  int level = 0;
  SurfaceGroup group;

  std::vector<Complex> vertex_position;
  std::vector<int> vertex_dof;
  std::vector<std::vector<int>> vertex_word;      // empty for masters
  std::vector<MobiusTransform> vertex_deck;       // word as one transform
  std::vector<std::array<int, 4>> vertex_shift;   // abelianized word
  std::vector<std::array<int, 3>> triangles;
  int num_dofs = 0;
  std::vector<int> dof_vertex;  // master vertex instance per dof

  // Per-triangle FEM geometry.
  std::vector<double> tri_area;                       // Euclidean, positive
  std::vector<std::array<Complex, 3>> tri_dv_coeff;   // w_v = sum a_c w_c
  std::vector<Complex> tri_barycenter;
  std::vector<std::array<Complex, 3>> tri_quad;       // edge midpoints

  std::vector<SeamSample> seam_samples;

  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_quad_points() const { return 3 * triangles.size(); }
  Complex quad_point(std::size_t t, int q) const { return tri_quad[t][q]; }

  /// Quotient Euler characteristic (V - E + F with E = 3F/2 on the
  /// closed surface).
  int euler_characteristic() const {
    return num_dofs - static_cast<int>(num_triangles()) / 2;
  }

  double min_corner_angle() const {
    double best = kPi;
    for (const auto& tri : triangles) {
      for (int c = 0; c < 3; ++c) {
        const Complex u = vertex_position[tri[(c + 1) % 3]] - vertex_position[tri[c]];
        const Complex w = vertex_position[tri[(c + 2) % 3]] - vertex_position[tri[c]];
        best = std::min(best, std::abs(std::arg(w / u)));
      }
    }
    return best;
  }
};

namespace detail {

struct EdgeKey {
  int lo, hi;
  bool operator<(const EdgeKey& o) const { return std::tie(lo, hi) < std::tie(o.lo, o.hi); }
};
inline EdgeKey edge_key(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

// Which octagon sides a point lies on (0, 1, or 2 of them).
inline std::vector<int> sides_of(const FundamentalOctagon& oct, const Complex& v,
                                 double tol = 1e-9) {
  std::vector<int> sides;
  for (int k = 0; k < 8; ++k) {
    const Complex c = std::polar(oct.side_circle_center_radius, k * kPi / 4.0);
    if (std::abs(std::abs(v - c) - oct.side_circle_radius) < tol) sides.push_back(k);
  }
  return sides;
}

}  // namespace detail

inline QuotientMesh build_mesh(const SurfaceGroup& G, int level) {
  if (level < 0) throw Error(ErrorCode::invalid_argument, "mesh level must be >= 0");
  QuotientMesh mesh;
  mesh.level = level;
  mesh.group = G;
  const FundamentalOctagon& oct = G.octagon;

  // Level-0 fan: ring alternates side midpoints (angle k pi/4) and octagon
  // vertices (angle (2k+1) pi/8).
  std::vector<Complex>& pos = mesh.vertex_position;
  pos.push_back(Complex(0, 0));
  std::vector<int> ring;
  for (int k = 0; k < 8; ++k) {
    pos.push_back(oct.edge_midpoints[k]);
    ring.push_back(static_cast<int>(pos.size()) - 1);
    pos.push_back(oct.vertices[k]);
    ring.push_back(static_cast<int>(pos.size()) - 1);
  }
  std::vector<std::array<int, 3>>& tris = mesh.triangles;
  for (int i = 0; i < 16; ++i)
    tris.push_back({0, ring[i], ring[(i + 1) % 16]});

  for (int l = 0; l < level; ++l) {
    std::map<detail::EdgeKey, int> midpoint_of;
    auto midpoint = [&](int i, int j) {
      const auto key = detail::edge_key(i, j);
      auto it = midpoint_of.find(key);
      if (it != midpoint_of.end()) return it->second;
      pos.push_back(hyperbolic_midpoint(pos[key.lo], pos[key.hi]));
      const int idx = static_cast<int>(pos.size()) - 1;
      midpoint_of.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      const int m01 = midpoint(t[0], t[1]);
      const int m12 = midpoint(t[1], t[2]);
      const int m20 = midpoint(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({t[1], m12, m01});
      next.push_back({t[2], m20, m12});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }

  // Classify vertices and assign quotient dofs.  Masters: interior points,
  // boundary points on sides 0..3, and the corner class representative V_0.
  const int nv = static_cast<int>(pos.size());
  mesh.vertex_dof.assign(nv, -1);
  mesh.vertex_word.assign(nv, {});
  std::vector<int> corner_of(nv, -1);  // octagon corner index, or -1
  std::vector<std::vector<int>> on_side(8);
  for (int i = 0; i < nv; ++i) {
    for (int j = 0; j < 8; ++j)
      if (std::abs(pos[i] - oct.vertices[j]) < 1e-12) corner_of[i] = j;
    if (corner_of[i] >= 0) continue;
    for (int s : detail::sides_of(oct, pos[i])) on_side[s].push_back(i);
  }

  int corner_master = -1;
  std::vector<int> slave(nv, 0);
  for (int i = 0; i < nv; ++i) {
    if (corner_of[i] == 0) corner_master = i;
    if (corner_of[i] > 0) slave[i] = 1;
  }
  for (int k = 4; k < 8; ++k)
    for (int i : on_side[k]) slave[i] = 1;

  for (int i = 0; i < nv; ++i) {
    if (slave[i]) continue;
    mesh.vertex_dof[i] = mesh.num_dofs++;
    mesh.dof_vertex.push_back(i);
  }

  // Side slaves: master position is g_{k-4}(v) on side k-4.
  for (int k = 4; k < 8; ++k) {
    const MobiusTransform& g = G.generators[k - 4];
    for (int i : on_side[k]) {
      const Complex m = g.apply(pos[i]);
      int master = -1;
      double best = 1e9;
      for (int j : on_side[k - 4]) {
        const double d = std::abs(pos[j] - m);
        if (d < best) {
          best = d;
          master = j;
        }
      }
      if (master < 0 || best > 1e-10)
        throw Error(ErrorCode::non_convergence, "side gluing failed to match vertices");
      mesh.vertex_dof[i] = mesh.vertex_dof[master];
      mesh.vertex_word[i] = {k};
    }
  }
  // Corner class: all eight octagon corners share the dof of V_0.
  for (int i = 0; i < nv; ++i) {
    const int j = corner_of[i];
    if (j < 0) continue;
    mesh.vertex_dof[i] = mesh.vertex_dof[corner_master];
    if (j > 0) mesh.vertex_word[i] = G.corner_words[j];
  }

  mesh.vertex_deck.resize(nv);
  mesh.vertex_shift.resize(nv);
  for (int i = 0; i < nv; ++i) {
    mesh.vertex_deck[i] = G.word_to_mobius(mesh.vertex_word[i]);
    mesh.vertex_shift[i] = SurfaceGroup::word_abelianized(mesh.vertex_word[i]);
  }
  // Gluing consistency: each deck maps its master position onto the slave.
  for (int i = 0; i < nv; ++i) {
    if (mesh.vertex_word[i].empty()) continue;
    const Complex master_pos =
        corner_of[i] >= 0 ? pos[corner_master]
                          : G.generators[mesh.vertex_word[i][0] - 4].apply(pos[i]);
    if (std::abs(mesh.vertex_deck[i].apply(master_pos) - pos[i]) > 1e-10)
      throw Error(ErrorCode::non_convergence, "deck transform mismatch");
  }

  // FEM geometry.
  const std::size_t nt = tris.size();
  mesh.tri_area.resize(nt);
  mesh.tri_dv_coeff.resize(nt);
  mesh.tri_barycenter.resize(nt);
  mesh.tri_quad.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    auto& tri = tris[t];
    const Complex p0 = pos[tri[0]];
    Complex e1 = pos[tri[1]] - p0;
    Complex e2 = pos[tri[2]] - p0;
    double area2 = e1.real() * e2.imag() - e1.imag() * e2.real();
    if (area2 < 0) {  // enforce counterclockwise orientation
      std::swap(tri[1], tri[2]);
      std::swap(e1, e2);
      area2 = -area2;
    }
    mesh.tri_area[t] = 0.5 * area2;
    const Complex delta = e1 * std::conj(e2) - e2 * std::conj(e1);  // = -4i area
    mesh.tri_dv_coeff[t] = {(std::conj(e1) - std::conj(e2)) / delta, std::conj(e2) / delta,
                            -std::conj(e1) / delta};
    mesh.tri_barycenter[t] = p0 + (e1 + e2) / 3.0;
    mesh.tri_quad[t] = {p0 + 0.5 * e1, p0 + 0.5 * (e1 + e2), p0 + 0.5 * e2};
  }

  // Seam samples: slave-side boundary edge midpoints with master images.
  for (int k = 4; k < 8; ++k) {
    std::vector<int> side = on_side[k];
    for (int i = 0; i < nv; ++i)
      if (corner_of[i] == (k - 1 + 8) % 8 || corner_of[i] == k % 8) side.push_back(i);
    std::sort(side.begin(), side.end(), [&](int a, int b) {
      return std::arg(pos[a] / std::polar(1.0, k * kPi / 4.0)) <
             std::arg(pos[b] / std::polar(1.0, k * kPi / 4.0));
    });
    for (std::size_t i = 0; i + 1 < side.size(); ++i) {
      const Complex p = hyperbolic_midpoint(pos[side[i]], pos[side[i + 1]]);
      mesh.seam_samples.push_back({p, G.generators[k - 4].apply(p), k});
    }
  }

  return mesh;
}

/// Quadrature of a density given at the 3*T quadrature points.
inline double integrate(const QuotientMesh& mesh, std::span<const double> quad_values,
                        AreaForm form) {
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double w = mesh.tri_area[t] / 3.0;
    double local = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double weight =
          form == AreaForm::Hyperbolic ? 2.0 * density_phi(mesh.tri_quad[t][q]) : 2.0;
      local += quad_values[3 * t + q] * weight;
    }
    total += w * local;
  }
  return total;
}

inline Complex integrate(const QuotientMesh& mesh, std::span<const Complex> quad_values,
                         AreaForm form) {
  Complex total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double w = mesh.tri_area[t] / 3.0;
    Complex local = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double weight =
          form == AreaForm::Hyperbolic ? 2.0 * density_phi(mesh.tri_quad[t][q]) : 2.0;
      local += quad_values[3 * t + q] * weight;
    }
    total += w * local;
  }
  return total;
}

template <typename F>
auto integrate(const QuotientMesh& mesh, F&& f, AreaForm form)
    -> decltype(f(Complex())) {
  using R = decltype(f(Complex()));
  std::vector<R> vals(mesh.num_quad_points());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (int q = 0; q < 3; ++q) vals[3 * t + q] = f(mesh.tri_quad[t][q]);
  return integrate(mesh, std::span<const R>(vals), form);
}

/// Conductivity of the conformal class: M^{-1} sqrt(det M), unit determinant.
inline Eigen::Matrix2d conformal_conductivity(const Eigen::Matrix2d& M) {
  const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  if (det <= 1e-12) throw Error(ErrorCode::degenerate_metric, "conformal tensor degenerate");
  const double s = std::sqrt(det);
  Eigen::Matrix2d C;
  C << M(1, 1) / s, -M(0, 1) / s, -M(1, 0) / s, M(0, 0) / s;
  return C;
}

/// Piecewise-linear stiffness of the Dirichlet form int grad^T C grad dx dy
/// on quotient dofs.  Symmetric positive semidefinite, kernel = constants.
inline Eigen::SparseMatrix<double> assemble_stiffness(
    const QuotientMesh& mesh, std::span<const Eigen::Matrix2d> tensor) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Matrix2d C = conformal_conductivity(tensor[t]);
    std::array<Eigen::Vector2d, 3> grad;
    for (int c = 0; c < 3; ++c) {
      const Complex a = mesh.tri_dv_coeff[t][c];
      grad[c] = Eigen::Vector2d(2.0 * a.real(), -2.0 * a.imag());
    }
    for (int c = 0; c < 3; ++c) {
      const int dc = mesh.vertex_dof[mesh.triangles[t][c]];
      for (int d = 0; d < 3; ++d) {
        const int dd = mesh.vertex_dof[mesh.triangles[t][d]];
        trip.emplace_back(dc, dd, mesh.tri_area[t] * grad[c].dot(C * grad[d]));
      }
    }
  }
  Eigen::SparseMatrix<double> K(mesh.num_dofs, mesh.num_dofs);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

/// Vertex table / triangle table / gluing table dump for debugging.
inline void export_mesh(const QuotientMesh& mesh, std::ostream& os) {
  os << "# vertices " << mesh.vertex_position.size() << "\n";
  for (std::size_t i = 0; i < mesh.vertex_position.size(); ++i)
    os << i << " " << mesh.vertex_position[i].real() << " " << mesh.vertex_position[i].imag()
       << " dof " << mesh.vertex_dof[i] << "\n";
  os << "# triangles " << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "# gluing\n";
  for (std::size_t i = 0; i < mesh.vertex_position.size(); ++i) {
    if (mesh.vertex_word[i].empty()) continue;
    os << i << " word";
    for (int k : mesh.vertex_word[i]) os << " " << k;
    os << "\n";
  }
}

}  // namespace teichlab
