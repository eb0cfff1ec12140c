#include <catch2/catch_amalgamated.hpp>

#include "teichlab/mesh.hpp"

#include <random>
#include <sstream>

using namespace teichlab;
using Catch::Approx;

namespace {
const SurfaceGroup& group() {
  static SurfaceGroup G = bolza_group();
  return G;
}
const QuotientMesh& mesh_at(int level) {
  static std::map<int, QuotientMesh> cache;
  auto it = cache.find(level);
  if (it == cache.end()) it = cache.emplace(level, build_mesh(group(), level)).first;
  return it->second;
}
double area_at(int level) {
  const auto& m = mesh_at(level);
  std::vector<double> ones(m.num_quad_points(), 1.0);
  return integrate(m, std::span<const double>(ones), AreaForm::Hyperbolic);
}
}  // namespace

TEST_CASE("triangle counts and quotient Euler characteristic") {
  REQUIRE(mesh_at(0).num_triangles() == 16);
  REQUIRE(mesh_at(3).num_triangles() == 1024);
  for (int level = 0; level <= 3; ++level) {
    const auto& m = mesh_at(level);
    REQUIRE(m.num_triangles() == 16u << (2 * level));
    REQUIRE(m.euler_characteristic() == -2);
    REQUIRE(m.min_corner_angle() > 0.15);
  }
  // Level 0 quotient: center, corner class, 4 edge-midpoint classes.
  REQUIRE(mesh_at(0).num_dofs == 6);
}

TEST_CASE("hyperbolic area converges to 4 pi at second order") {
  const double a3 = area_at(3), a4 = area_at(4), a5 = area_at(5);
  REQUIRE(a5 == Approx(4.0 * kPi).epsilon(1e-3));
  const double e3 = std::abs(a3 - 4.0 * kPi);
  const double e4 = std::abs(a4 - 4.0 * kPi);
  const double e5 = std::abs(a5 - 4.0 * kPi);
  REQUIRE(e3 / e4 == Approx(4.0).margin(1.2));
  REQUIRE(e4 / e5 == Approx(4.0).margin(1.2));
}

TEST_CASE("integrate zero density") {
  const auto& m = mesh_at(2);
  std::vector<double> zeros(m.num_quad_points(), 0.0);
  REQUIRE(integrate(m, std::span<const double>(zeros), AreaForm::Hyperbolic) == 0.0);
  REQUIRE(integrate(m, [](const Complex&) { return Complex(0, 0); }, AreaForm::Euclidean) ==
          Complex(0, 0));
}

TEST_CASE("boundary gluing maps partners onto each other") {
  const auto& m = mesh_at(3);
  int glued = 0;
  for (std::size_t i = 0; i < m.vertex_position.size(); ++i) {
    if (m.vertex_word[i].empty()) continue;
    ++glued;
    // Find the master instance carrying the same dof with empty word.
    bool ok = false;
    for (std::size_t j = 0; j < m.vertex_position.size(); ++j) {
      if (m.vertex_dof[j] != m.vertex_dof[i] || !m.vertex_word[j].empty()) continue;
      if (std::abs(m.vertex_deck[i].apply(m.vertex_position[j]) - m.vertex_position[i]) < 1e-10)
        ok = true;
    }
    REQUIRE(ok);
  }
  REQUIRE(glued > 0);
}

TEST_CASE("equivariant sampling is representative independent") {
  // The identity map x -> x is equivariant: transporting the master value
  // with the deck must reproduce the slave position.
  const auto& m = mesh_at(3);
  for (std::size_t i = 0; i < m.vertex_position.size(); ++i) {
    if (m.vertex_word[i].empty()) continue;
    Complex master_pos;
    bool have = false;
    for (std::size_t j = 0; j < m.vertex_position.size() && !have; ++j)
      if (m.vertex_dof[j] == m.vertex_dof[i] && m.vertex_word[j].empty()) {
        master_pos = m.vertex_position[j];
        have = true;
      }
    REQUIRE(have);
    REQUIRE(std::abs(m.vertex_deck[i].apply(master_pos) - m.vertex_position[i]) < 1e-9);
  }
}

TEST_CASE("stiffness: kernel, cross-assembly, conformal invariance") {
  const auto& m = mesh_at(3);
  std::vector<Eigen::Matrix2d> tensors(m.num_triangles(), Eigen::Matrix2d::Identity());
  const Eigen::SparseMatrix<double> K = assemble_stiffness(m, tensors);

  // Constants span the kernel.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_dofs);
  REQUIRE((K * ones).cwiseAbs().maxCoeff() < 1e-10);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd f(m.num_dofs);
  for (int i = 0; i < m.num_dofs; ++i) f(i) = u(rng);

  // Independent energy route through the complex Wirtinger derivative:
  // (1/2) f^T K f = sum_T area * 2 |f_v|^2 for real scalar fields.
  double direct = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    Complex fv = 0.0;
    for (int c = 0; c < 3; ++c)
      fv += m.tri_dv_coeff[t][c] * f(m.vertex_dof[m.triangles[t][c]]);
    direct += m.tri_area[t] * 2.0 * std::norm(fv);
  }
  REQUIRE(0.5 * f.dot(K * f) == Approx(direct).epsilon(1e-10));

  // Pointwise positive rescaling of the tensor leaves the form unchanged.
  std::vector<Eigen::Matrix2d> scaled = tensors;
  for (auto& M : scaled) M *= std::exp(u(rng));
  const Eigen::SparseMatrix<double> K2 = assemble_stiffness(m, scaled);
  REQUIRE(std::abs(f.dot(K2 * f) - f.dot(K * f)) <= 1e-12 * std::abs(f.dot(K * f)));

  // Nonzero fields with zero mean see a positive form (kernel is only the
  // constants).
  Eigen::VectorXd g = f.array() - f.mean();
  REQUIRE(g.dot(K * g) > 1e-6 * g.squaredNorm());
}

TEST_CASE("degenerate tensor rejected") {
  const auto& m = mesh_at(0);
  std::vector<Eigen::Matrix2d> tensors(m.num_triangles(), Eigen::Matrix2d::Identity());
  tensors[3] = Eigen::Matrix2d::Zero();
  REQUIRE_THROWS_AS(assemble_stiffness(m, tensors), Error);
}

TEST_CASE("seam samples pair boundary points") {
  const auto& m = mesh_at(2);
  REQUIRE(m.seam_samples.size() > 0);
  for (const auto& s : m.seam_samples) {
    REQUIRE(s.slave_side >= 4);
    REQUIRE(std::abs(s.master_point -
                     group().generators[s.slave_side - 4].apply(s.slave_point)) < 1e-12);
  }
}

TEST_CASE("mesh export writes tables") {
  std::ostringstream os;
  export_mesh(mesh_at(0), os);
  const std::string text = os.str();
  REQUIRE(text.find("# vertices") != std::string::npos);
  REQUIRE(text.find("# triangles") != std::string::npos);
  REQUIRE(text.find("# gluing") != std::string::npos);
}
