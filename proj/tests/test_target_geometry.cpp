#include <catch2/catch_amalgamated.hpp>

#include "teichlab/target_geometry.hpp"

#include <random>

using namespace teichlab;
using Catch::Approx;

namespace {

std::mt19937_64 rng(2718);

Complex random_point(double rmax = 0.9) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Complex w;
  do {
    w = Complex(u(rng), u(rng));
  } while (std::abs(w) >= rmax);
  return w;
}

ComplexTangent random_complex_tangent() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};
}

}  // namespace

TEST_CASE("flat target is curvature free") {
  TargetGeometry torus{TargetKind::FlatTorus};
  for (int i = 0; i < 50; ++i) {
    const Complex w = random_point();
    const auto X = random_complex_tangent(), Y = random_complex_tangent(),
               Z = random_complex_tangent(), W = random_complex_tangent();
    REQUIRE(std::abs(torus.riemann(w, X, Y, Z, W)) == 0.0);
    REQUIRE(std::abs(torus.riemann_via_coordinates(w, X, Y, Z, W)) == 0.0);
  }
  const ComplexTangent e1 = ComplexTangent::from_real(Complex(1, 0));
  const ComplexTangent e2 = ComplexTangent::from_real(Complex(0, 1));
  REQUIRE(std::abs(torus.hermitian_sectional(Complex(0.1, 0.2), e1, e2)) < 1e-12);
}

TEST_CASE("hyperbolic target: sectional curvature -1 both routes") {
  TargetGeometry hyp{TargetKind::Hyperbolic};
  const ComplexTangent e1 = ComplexTangent::from_real(Complex(1, 0));
  const ComplexTangent e2 = ComplexTangent::from_real(Complex(0, 1));
  for (int i = 0; i < 60; ++i) {
    const Complex w = (i == 0) ? Complex(0, 0) : random_point();
    const double rho = hyp.rho(w);
    const double den = rho * rho;  // |e1|^2 |e2|^2, orthogonal frame
    const Complex closed = hyp.riemann(w, e1, e2, e1, e2);
    const Complex coord = hyp.riemann_via_coordinates(w, e1, e2, e1, e2);
    REQUIRE((closed / den).real() == Approx(-1.0).epsilon(1e-12));
    REQUIRE((coord / den).real() == Approx(-1.0).epsilon(1e-9));
    REQUIRE(std::abs(hyp.hermitian_sectional(w, e1, e2) + 1.0) < 1e-12);
  }
}

TEST_CASE("coordinate formula matches the closed form on complex inputs") {
  TargetGeometry hyp{TargetKind::Hyperbolic};
  for (int i = 0; i < 100; ++i) {
    const Complex w = random_point(0.85);
    const auto X = random_complex_tangent(), Y = random_complex_tangent(),
               Z = random_complex_tangent(), W = random_complex_tangent();
    const Complex a = hyp.riemann(w, X, Y, Z, W);
    const Complex b = hyp.riemann_via_coordinates(w, X, Y, Z, W);
    const double scale = std::max(1.0, std::abs(a));
    REQUIRE(std::abs(a - b) < 1e-9 * scale);
  }
}

TEST_CASE("riemann symmetries and first bianchi") {
  TargetGeometry hyp{TargetKind::Hyperbolic};
  for (int i = 0; i < 60; ++i) {
    const Complex w = random_point(0.85);
    const auto X = random_complex_tangent(), Y = random_complex_tangent(),
               Z = random_complex_tangent(), W = random_complex_tangent();
    const Complex r = hyp.riemann_via_coordinates(w, X, Y, Z, W);
    const double scale = std::max(1.0, std::abs(r));
    REQUIRE(std::abs(r + hyp.riemann_via_coordinates(w, Y, X, Z, W)) < 1e-10 * scale);
    REQUIRE(std::abs(r + hyp.riemann_via_coordinates(w, X, Y, W, Z)) < 1e-10 * scale);
    REQUIRE(std::abs(r - hyp.riemann_via_coordinates(w, Z, W, X, Y)) < 1e-10 * scale);
    const Complex bianchi = hyp.riemann_via_coordinates(w, X, Y, Z, W) +
                            hyp.riemann_via_coordinates(w, Y, Z, X, W) +
                            hyp.riemann_via_coordinates(w, Z, X, Y, W);
    REQUIRE(std::abs(bianchi) < 1e-10 * scale);
  }
}

TEST_CASE("hermitian sectional curvature properties") {
  TargetGeometry hyp{TargetKind::Hyperbolic};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  while (tested < 1000) {
    const Complex w = random_point(0.95);
    const auto X = random_complex_tangent(), Y = random_complex_tangent();
    Complex k1, k2;
    try {
      k1 = hyp.hermitian_sectional(w, X, Y);
      k2 = hyp.hermitian_sectional(w, Y, X);
    } catch (const Error&) {
      continue;  // degenerate plane draw
    }
    ++tested;
    REQUIRE(std::abs(k1.imag()) < 1e-10);
    REQUIRE(k1.real() < -1e-6);
    REQUIRE(std::abs(k1 - k2) < 1e-10);
    const Complex lambda(u(rng), u(rng));
    if (std::abs(lambda) > 0.1) {
      const ComplexTangent Xs{lambda * X.cw, lambda * X.cwbar};
      REQUIRE(std::abs(hyp.hermitian_sectional(w, Xs, Y) - k1) < 1e-9);
    }
  }
}

TEST_CASE("degenerate plane rejected") {
  TargetGeometry hyp{TargetKind::Hyperbolic};
  const ComplexTangent X = random_complex_tangent();
  REQUIRE_THROWS_AS(hyp.hermitian_sectional(Complex(0.1, 0.1), X, X), Error);
}

TEST_CASE("christoffel consistency, complex vs real") {
  TargetGeometry hyp{TargetKind::Hyperbolic};
  for (int i = 0; i < 40; ++i) {
    const Complex w = random_point(0.9);
    // Gamma^w_{ww} = d_w log rho by finite differences.
    const double h = 1e-6;
    auto logrho = [&](const Complex& x) { return std::log(hyp.rho(x)); };
    const double dx = (logrho(w + h) - logrho(w - h)) / (2 * h);
    const double dy = (logrho(w + Complex(0, h)) - logrho(w - Complex(0, h))) / (2 * h);
    REQUIRE(std::abs(hyp.christoffel(w) - 0.5 * Complex(dx, -dy)) < 1e-7);
    // Lower-index symmetry of the real symbols.
    for (int k = 0; k < 2; ++k)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          REQUIRE(hyp.christoffel_real(w, k, a, b) == Approx(hyp.christoffel_real(w, k, b, a)));
  }
}
