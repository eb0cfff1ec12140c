#include <catch2/catch_amalgamated.hpp>

#include "teichlab/hyperbolic.hpp"

#include <random>

using namespace teichlab;
using Catch::Approx;

namespace {

std::mt19937_64 rng(20240817);

Complex random_disk_point(double rmax = 0.95) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Complex v;
  do {
    v = Complex(u(rng), u(rng));
  } while (std::abs(v) >= rmax);
  return v;
}

MobiusTransform random_mobius() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Complex b(u(rng), u(rng));
  const double phase = u(rng) * kPi;
  const Complex a = std::polar(std::sqrt(1.0 + std::norm(b)), phase);
  return MobiusTransform{a, b};
}

}  // namespace

TEST_CASE("mobius apply basics") {
  const MobiusTransform id = MobiusTransform::identity();
  REQUIRE(id.apply(Complex(0.3, 0.0)).real() == Approx(0.3).margin(1e-15));

  // Axis translation with cosh(t) = 1 + sqrt2 moves the origin to tanh t.
  const double t = std::acosh(1.0 + std::sqrt(2.0));
  const MobiusTransform g{Complex(std::cosh(t), 0), Complex(std::sinh(t), 0)};
  const Complex img = g.apply(Complex(0, 0));
  REQUIRE(img.real() == Approx(std::tanh(t)).epsilon(1e-13));
  REQUIRE(img.real() == Approx(0.9101797211244547).epsilon(1e-10));
  REQUIRE(img.imag() == Approx(0.0).margin(1e-15));

  for (int i = 0; i < 200; ++i) {
    const MobiusTransform h = random_mobius();
    const Complex v = random_disk_point();
    REQUIRE(std::abs(h.inverse().apply(h.apply(v)) - v) < 1e-13);
    REQUIRE(std::abs(h.apply(v)) < 1.0);
  }
}

TEST_CASE("mobius derivative and chain rule") {
  REQUIRE(MobiusTransform::identity().derivative(Complex(0.2, 0.1)) == Complex(1.0, 0.0));

  const double t = std::acosh(1.0 + std::sqrt(2.0));
  const MobiusTransform g{Complex(std::cosh(t), 0), Complex(std::sinh(t), 0)};
  REQUIRE(g.derivative(Complex(0, 0)).real() ==
          Approx(1.0 / sqr(1.0 + std::sqrt(2.0))).epsilon(1e-13));
  REQUIRE(g.derivative(Complex(0, 0)).real() == Approx(0.17157287525381).epsilon(1e-10));

  for (int i = 0; i < 200; ++i) {
    const MobiusTransform a = random_mobius(), b = random_mobius();
    const Complex v = random_disk_point();
    const Complex lhs = compose(a, b).derivative(v);
    const Complex rhs = a.derivative(b.apply(v)) * b.derivative(v);
    REQUIRE(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("unit pseudo-determinant preserved") {
  for (int i = 0; i < 200; ++i) {
    const MobiusTransform a = random_mobius(), b = random_mobius();
    REQUIRE(compose(a, b).det_residual() < 1e-12);
    REQUIRE(a.inverse().det_residual() < 1e-12);
  }
}

TEST_CASE("hyperbolic distance") {
  REQUIRE(hyperbolic_distance(Complex(0, 0), Complex(0.5, 0)) ==
          Approx(std::log(3.0)).epsilon(1e-13));
  const Complex p = random_disk_point();
  REQUIRE(hyperbolic_distance(p, p) == Approx(0.0).margin(1e-12));

  const double t = std::acosh(1.0 + std::sqrt(2.0));
  const MobiusTransform g{Complex(std::cosh(t), 0), Complex(std::sinh(t), 0)};
  REQUIRE(hyperbolic_distance(Complex(0, 0), g.apply(Complex(0, 0))) ==
          Approx(2.0 * t).epsilon(1e-12));
  REQUIRE(2.0 * t == Approx(3.0571418389619965).epsilon(1e-12));

  for (int i = 0; i < 300; ++i) {
    const MobiusTransform h = random_mobius();
    const Complex a = random_disk_point(), b = random_disk_point();
    REQUIRE(std::abs(hyperbolic_distance(h.apply(a), h.apply(b)) -
                     hyperbolic_distance(a, b)) < 1e-11);
  }
}

TEST_CASE("density and curvature normalization") {
  REQUIRE(density_phi(Complex(0, 0)) == Approx(2.0));
  REQUIRE(density_phi(Complex(0.5, 0)) == Approx(2.0 / sqr(0.75)).epsilon(1e-14));

  // d/dv d/dvbar log phi = phi, checked by the 5-point Laplacian stencil
  // (d_v d_vbar = Laplacian/4) with Richardson extrapolation.
  auto ddbar_log_phi = [](const Complex& v, double h) {
    auto f = [](const Complex& w) { return std::log(density_phi(w)); };
    return (f(v + h) + f(v - h) + f(v + Complex(0, h)) + f(v - Complex(0, h)) - 4.0 * f(v)) /
           (4.0 * h * h);
  };
  for (int i = 0; i < 50; ++i) {
    const Complex v = random_disk_point(0.8);
    const double c1 = ddbar_log_phi(v, 1e-3), c2 = ddbar_log_phi(v, 5e-4);
    const double extrap = (4.0 * c2 - c1) / 3.0;
    REQUIRE(extrap == Approx(density_phi(v)).epsilon(1e-8));
  }
}

TEST_CASE("hyperbolic disk area against closed form") {
  // Radial Gauss-Legendre quadrature of 2 phi against 2 pi (cosh R - 1).
  const int n = 64;
  std::vector<double> x(n), w(n);
  // Nodes/weights by Newton on Legendre polynomials.
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) {
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        break;
      }
    }
  }
  for (double R : {0.5, 1.0, 2.0, 3.0}) {
    const double r = std::tanh(R / 2.0);
    double area = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = 0.5 * r * (x[i] + 1.0);
      area += 0.5 * r * w[i] * 2.0 * kPi * t * 2.0 * density_phi(Complex(t, 0));
    }
    REQUIRE(area == Approx(2.0 * kPi * (std::cosh(R) - 1.0)).epsilon(1e-6));
  }
}

TEST_CASE("disk exp and log") {
  for (double t : {0.1, 0.5, 1.0, 2.5}) {
    const Complex q = disk_exp(Complex(0, 0), Complex(t, 0));
    REQUIRE(q.real() == Approx(std::tanh(t / 2.0)).epsilon(1e-13));
    REQUIRE(hyperbolic_distance(Complex(0, 0), q) == Approx(t).epsilon(1e-12));
  }
  const Complex p0 = random_disk_point();
  REQUIRE(std::abs(disk_log(p0, p0)) == Approx(0.0).margin(1e-14));

  for (int i = 0; i < 300; ++i) {
    const Complex p = random_disk_point(), q = random_disk_point();
    const Complex xi = disk_log(p, q);
    REQUIRE(std::abs(xi) == Approx(hyperbolic_distance(p, q)).epsilon(1e-11));
    REQUIRE(std::abs(disk_exp(p, xi) - q) < 1e-10);
    REQUIRE(std::abs(disk_log(p, disk_exp(p, xi)) - xi) < 1e-10);
  }
}

TEST_CASE("tangent frame conversion") {
  for (int i = 0; i < 50; ++i) {
    const Complex p = random_disk_point();
    const Complex xi(0.3, -0.2);
    // disk_exp(p, t xi) has coordinate velocity tangent_to_coordinate(p, xi).
    const double h = 1e-6;
    const Complex fd = (disk_exp(p, h * xi) - disk_exp(p, -h * xi)) / (2.0 * h);
    REQUIRE(std::abs(fd - tangent_to_coordinate(p, xi)) < 1e-8);
    REQUIRE(std::abs(coordinate_to_tangent(p, tangent_to_coordinate(p, xi)) - xi) < 1e-13);
  }
}
