#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "oseen_rotor/scalar_kernels.hpp"

using namespace oseen_rotor;
using std::numbers::pi;

namespace {

// Plain series in long double, terms until below 1e-15 of the sum.
long double series_kummer(long double c, long double u) {
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int n = 0; n < 100000; ++n) {
    term *= u / (c + n);
    sum += term;
    if (term < 1e-15L * sum && n > u) break;
  }
  return sum;
}

// e^{-u} 1F1(1, c, u) = Gamma(c) u^{1-c} P(c-1, u).
double closed_damped(double c, double u) {
  return std::tgamma(c) * std::pow(u, 1.0 - c) * boost::math::gamma_p(c - 1.0, u);
}

// Lambda straight from its definition, with the series in long double.
Mat3 lambda_direct(const Vec3& x, double t) {
  const double u = x.squaredNorm() / (4.0 * t);
  const double k = std::pow(4.0 * pi * t, -1.5) * std::exp(-u);
  const Mat3 n = x.squaredNorm() > 0 ? Mat3(x * x.transpose() / x.squaredNorm())
                                     : Mat3(Mat3::Zero());
  const double f = static_cast<double>(series_kummer(2.5L, u));
  const Mat3 id = Mat3::Identity();
  return k * (id - n - f * (id / 3.0 - n));
}

}  // namespace

TEST_CASE("heat kernel values") {
  CHECK(heat_kernel(Vec3::Zero(), 1.0) ==
        doctest::Approx(std::pow(4 * pi, -1.5)).epsilon(1e-15));
  CHECK(heat_kernel(Vec3(2, 0, 0), 1.0) ==
        doctest::Approx(std::pow(4 * pi, -1.5) * std::exp(-1.0)).epsilon(1e-14));
  const double far = heat_kernel(Vec3(100, 0, 0), 1e-3);
  CHECK(far == 0.0);
  CHECK_THROWS_AS(heat_kernel(Vec3::Zero(), 0.0), DomainError);
  CHECK_THROWS_AS(heat_kernel(Vec3::Zero(), -1.0), DomainError);
}

TEST_CASE("kummer series against oracles") {
  CHECK(kummer_1(0.0) == 1.0);
  CHECK(kummer_1(1.0) == doctest::Approx(1.54512).epsilon(1e-5));
  for (double u : {1e-6, 0.1, 1.0, 3.7, 10.0, 25.0, 29.9}) {
    const double ref = static_cast<double>(series_kummer(2.5L, u));
    CHECK(kummer_1(u) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK_THROWS_AS(kummer_1(-1.0), DomainError);
  CHECK(std::isinf(kummer_1(1e4)));
}

TEST_CASE("damped kummer matches closed forms on the whole range") {
  CHECK(damped_kummer(0.0) == 1.0);
  CHECK(damped_kummer(1.0) == doctest::Approx(std::exp(-1.0) * 1.54512).epsilon(1e-5));
  for (double u : {1e-3, 0.5, 2.0, 10.0, 29.0, 30.5, 45.0, 100.0, 1e3, 1e5, 1e8}) {
    // Erf form, valid for c = 5/2.
    const double su = std::sqrt(u);
    const double erf_form =
        1.5 / u * (std::sqrt(pi) * boost::math::erf(su) / (2.0 * su) - std::exp(-u));
    CHECK(damped_kummer(u) == doctest::Approx(erf_form).epsilon(1e-10));
    for (double c : {2.5, 3.5, 4.5, 5.5}) {
      CHECK(damped_kummer_c(c, u) == doctest::Approx(closed_damped(c, u)).epsilon(1e-10));
    }
  }
  CHECK(damped_kummer(1e3) ==
        doctest::Approx(std::tgamma(2.5) * std::pow(10.0, -4.5)).epsilon(1e-2));
  for (double u = 0.0; u <= 30.0; u += 0.37) {
    CHECK(damped_kummer(u) * std::exp(u) == doctest::Approx(kummer_1(u)).epsilon(1e-10));
  }
}

TEST_CASE("projector is a rank-one orthogonal projection") {
  CHECK((projector(Vec3(1, 0, 0)) - Mat3(Vec3(1, 0, 0).asDiagonal())).norm() == 0.0);
  Mat3 half = Mat3::Zero();
  half.topLeftCorner<2, 2>().setConstant(0.5);
  CHECK((projector(Vec3(1, 1, 0)) - half).norm() < 1e-15);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x(g(rng), g(rng), g(rng));
    const Mat3 n = projector(x);
    CHECK((n * n - n).norm() < 1e-14);
    CHECK((n - n.transpose()).norm() == 0.0);
    CHECK(n.trace() == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(projector(Vec3::Zero()), DomainError);
}

TEST_CASE("lambda tensor agrees with its definition") {
  const double k0 = std::pow(4 * pi, -1.5);
  CHECK((lambda_tensor(Vec3::Zero(), 1.0) - (2.0 / 3.0) * k0 * Mat3::Identity()).norm() <
        1e-16);
  CHECK((2.0 / 3.0) * k0 == doctest::Approx(0.0149657).epsilon(1e-5));

  // Extrapolation towards the origin reaches the continuous extension.
  for (double r : {1e-4, 1e-5, 1e-6}) {
    const Mat3 l = lambda_tensor(Vec3(r, 0.3 * r, -0.2 * r), 1.0);
    CHECK((l - (2.0 / 3.0) * k0 * Mat3::Identity()).norm() < 10 * r * r);
  }

  const Mat3 axis = lambda_tensor(Vec3(1, 0, 0), 1.0);
  CHECK((axis - axis.transpose()).norm() == 0.0);
  CHECK(axis(0, 1) == 0.0);
  CHECK(axis(0, 2) == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  std::uniform_real_distribution<double> ut(0.05, 4.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(uni(rng), uni(rng), uni(rng));
    const double t = ut(rng);
    if (x.squaredNorm() / (4 * t) > 25.0 || x.squaredNorm() / (4 * t) < 0.5) continue;
    const Mat3 ref = lambda_direct(x, t);
    const Mat3 got = lambda_tensor(x, t);
    CHECK((got - ref).norm() <= 1e-10 * ref.norm());
    CHECK((got - got.transpose()).norm() <= 1e-15 * got.norm());
  }

  // Large u: only the Kummer part survives, ~ 3/(4 pi) |x|^-3 (N - delta/3).
  const Vec3 x(1e3, 0, 0);
  const Mat3 big = lambda_tensor(x, 1.0);
  const Mat3 n = projector(x);
  const Mat3 asym = 3.0 / (4 * pi) * std::pow(1e3, -3) * (n - Mat3::Identity() / 3.0);
  CHECK(big.allFinite());
  CHECK((big - asym).norm() <= 1e-5 * asym.norm());
  CHECK_THROWS_AS(lambda_tensor(x, 0.0), DomainError);
}

TEST_CASE("lambda is continuous at the origin") {
  const Mat3 l0 = lambda_tensor(Vec3::Zero(), 1.0);
  double prev = 1.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    double sup = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double th = pi * (k + 0.5) / 20;
      const Vec3 x = eps * Vec3(std::cos(th), std::sin(th) * 0.6, std::sin(th) * 0.8);
      sup = std::max(sup, (lambda_tensor(x, 1.0) - l0).norm());
    }
    CHECK(sup < prev);
    prev = sup;
  }
}

TEST_CASE("no overflow across the full argument range") {
  for (double u : {0.0, 1e-12, 1.0, 29.99, 30.01, 700.0, 710.0, 1e4, 1e8}) {
    CHECK(std::isfinite(damped_kummer(u)));
    CHECK(std::isfinite(exp_neg(u)));
    const LambdaProfile p = lambda_profile(u);
    CHECK(std::isfinite(p.a));
    CHECK(std::isfinite(p.d2h));
  }
  for (double t : {1e-8, 1e-3, 1.0, 1e4, 1e8}) {
    for (double r : {0.0, 1e-6, 1.0, 1e3, 1e6}) {
      const Vec3 x(r, 0.5 * r, -0.25 * r);
      CHECK(lambda_tensor(x, t).allFinite());
      CHECK(lambda_tensor_d1(x, t, Vec3(0, 1, 0)).allFinite());
      CHECK(lambda_tensor_d2(x, t, Vec3(1, 0, 0), Vec3(0, 0, 1)).allFinite());
    }
  }
}

TEST_CASE("lambda derivatives match central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const Vec3 x(uni(rng), uni(rng), uni(rng));
    const double t = 0.3 + std::abs(uni(rng));
    const Vec3 v = Vec3(uni(rng), uni(rng), uni(rng)).normalized();
    const Vec3 w = Vec3(uni(rng), uni(rng), uni(rng)).normalized();
    const Mat3 fd1 = (lambda_tensor(x + h * v, t) - lambda_tensor(x - h * v, t)) / (2 * h);
    const Mat3 an1 = lambda_tensor_d1(x, t, v);
    CHECK((fd1 - an1).norm() <= 1e-6 * (an1.norm() + lambda_tensor(x, t).norm()));
    const Mat3 fd2 =
        (lambda_tensor_d1(x + h * w, t, v) - lambda_tensor_d1(x - h * w, t, v)) / (2 * h);
    const Mat3 an2 = lambda_tensor_d2(x, t, v, w);
    CHECK((fd2 - an2).norm() <= 1e-6 * (an2.norm() + an1.norm() + lambda_tensor(x, t).norm()));
    CHECK((an2 - lambda_tensor_d2(x, t, w, v)).norm() <= 1e-14 * (an2.norm() + 1e-300));
  }
}

TEST_CASE("pressure kernel") {
  CHECK((pressure_kernel(Vec3(1, 0, 0)) - Vec3(1 / (4 * pi), 0, 0)).norm() < 1e-17);
  CHECK((pressure_kernel(Vec3(2, 0, 0)) - Vec3(1 / (16 * pi), 0, 0)).norm() < 1e-17);
  CHECK((pressure_kernel(Vec3(0, 3, 4)) - Vec3(0, 3.0 / (500 * pi), 4.0 / (500 * pi))).norm() <
        1e-17);
  CHECK_THROWS_AS(pressure_kernel(Vec3::Zero()), DomainError);
  const Vec3 x(0.7, -1.2, 0.4);
  const double h = 1e-6;
  const Mat3 g = pressure_kernel_gradient(x);
  for (int m = 0; m < 3; ++m) {
    const Vec3 e = h * Vec3::Unit(m);
    const Vec3 fd = (pressure_kernel(x + e) - pressure_kernel(x - e)) / (2 * h);
    CHECK((fd - g.col(m)).norm() < 1e-8);
  }
}
