#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oseen_rotor/quadrature.hpp"
#include "oseen_rotor/time_quadrature.hpp"
#include "oseen_rotor/wake_geometry.hpp"

using namespace oseen_rotor;

namespace {

// Brute force: t = s^2 on [0, 1], then fixed composite Gauss-Legendre panels
// of width 0.05 out to T, plus the t^{-2} bound past T as slack.
template <class F>
Mat3 brute_force(F&& f, double t_max) {
  const GaussRule g = gauss_legendre(8);
  Mat3 sum = Mat3::Zero();
  const int head = 200;
  for (int p = 0; p < head; ++p) {
    const double a = static_cast<double>(p) / head;
    const double b = static_cast<double>(p + 1) / head;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i];
      sum += 0.5 * (b - a) * g.weights[i] * f(s * s) * (2.0 * s);
    }
  }
  const double h = 0.05;
  for (double a = 1.0; a < t_max; a += h) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double t = a + 0.5 * h * (1.0 + g.nodes[i]);
      sum += 0.5 * h * g.weights[i] * f(t);
    }
  }
  return sum;
}

double rel_diff(const Mat3& a, const Mat3& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("spec validation and tail map names") {
  QuadSpec s;
  CHECK_NOTHROW(s.validate());
  s.rel_tol = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = QuadSpec{};
  s.split_point = -1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  CHECK(tail_map_from_string("exp") == TailMap::exp);
  CHECK(std::string(to_string(TailMap::reciprocal)) == "reciprocal");
  CHECK_THROWS_AS(tail_map_from_string("bogus"), DomainError);
}

TEST_CASE("gregory correction sums a smooth sequence") {
  // phi_k = (k + a)^{-3}: sum by brute force, integral = 1 / (2 a^2).
  // The tail always starts at least 18 periods out.
  for (double a : {18.0, 24.0, 40.0}) {
    std::array<Eigen::Matrix<double, 1, 1>, 6> phi;
    for (int k = 0; k < 6; ++k) phi[k](0, 0) = std::pow(k + a, -3.0);
    double err = 0.0;
    const double corr = detail::gregory_correction(phi, err)(0, 0);
    long double sum = 0.0L;
    for (long k = 2000000; k >= 0; --k) sum += std::pow(static_cast<long double>(k) + a, -3.0L);
    sum += 1.0L / (2.0L * (2000000.5L + a) * (2000000.5L + a));
    const double got = 1.0 / (2 * a * a) + corr;
    CHECK(std::abs(got - static_cast<double>(sum)) < 1e-6 * static_cast<double>(sum));
    CHECK(std::abs(got - static_cast<double>(sum)) <= 10 * err + 1e-16);
  }
}

TEST_CASE("peak location on the axis") {
  const FlowParams p(1.0, 1.0);
  // phi = (r - t)^2 + t is minimal at t = r - 1/2.
  for (double r : {3.0, 10.0, 100.0}) {
    const PeakLocation pk = locate_peak(Vec3(r, 0, 0), Vec3::Zero(), p);
    CHECK(pk.t == doctest::Approx(r - 0.5).epsilon(1e-8));
    CHECK(pk.phi == doctest::Approx(r - 0.25).epsilon(1e-10));
  }
  const PeakLocation up = locate_peak(Vec3(-5, 0, 0), Vec3::Zero(), p);
  CHECK(up.t < 1e-8);
}

TEST_CASE("z tensor against a brute-force composite rule") {
  const FlowParams p(1.0, 1.0);
  struct Case { Vec3 y, z; };
  const Case cases[] = {{{5, 0, 0}, {0, 0, 0}},
                        {{4, 2, 0}, {0.3, 0, 0}},
                        {{0, 3, 1}, {0.5, -0.4, 0.2}},
                        {{-2, 1, 0}, {0.1, 0.2, 0.3}}};
  QuadSpec tight;
  tight.rel_tol = 1e-9;
  for (const auto& c : cases) {
    const ZValue z = z_tensor(c.y, c.z, p, tight);
    Mat3 ref = brute_force(
        [&](double t) { return gamma_kernel(c.y, c.z, t, p); }, 3000.0);
    // Far tail of the (1,1) entry: Lambda(-t e1) ~ 2 / (4 pi t^3) there; the
    // other entries oscillate with the rotation and cancel to O(T^{-3}).
    ref(0, 0) += 1.0 / (4.0 * std::numbers::pi * 3000.0 * 3000.0);
    CHECK(rel_diff(z.value, ref) < 5e-7);
    CHECK(z.error_estimate >= 0.0);
    CHECK(z.evaluations > 0);
  }
}

TEST_CASE("reciprocal and exponential tail maps agree") {
  const FlowParams p(1.0, 1.0);
  QuadSpec a;
  a.rel_tol = 5e-7;
  QuadSpec b = a;
  b.tail_map = TailMap::exp;
  const Vec3 y(5, 0, 0);
  const ZValue za = z_tensor(y, Vec3::Zero(), p, a);
  const ZValue zb = z_tensor(y, Vec3::Zero(), p, b);
  const double scale = za.value.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double d = std::abs(za.value(i, j) - zb.value(i, j));
      CHECK(d <= 1e-6 * std::max(std::abs(za.value(i, j)), 1e-6 * scale));
    }
  }
}

TEST_CASE("axis entry does not depend on the Taylor number") {
  for (double r : {2.0, 5.0, 20.0}) {
    const Vec3 y(r, 0, 0);
    const double a = z_tensor(y, Vec3::Zero(), FlowParams(1.0, 1.0)).value(0, 0);
    const double b = z_tensor(y, Vec3::Zero(), FlowParams(1.0, 5.0)).value(0, 0);
    CHECK(std::abs(a - b) <= 2e-6 * std::abs(a));
  }
}

TEST_CASE("near-field growth like |y - z|^{-1}") {
  const FlowParams p(1.0, 1.0);
  const Vec3 y(0.5, 0.2, -0.1);
  const Vec3 dir = Vec3(1, 2, -1).normalized();
  std::vector<double> ratios;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    ratios.push_back(z_tensor(y, y - eps * dir, p).value.norm() * eps);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo <= 2.0);
  CHECK_THROWS_AS(z_tensor(y, y, p), SingularPointError);
}

TEST_CASE("differentiation under the integral") {
  const FlowParams p(1.0, 1.0);
  const Vec3 y(4, 2, 0), z(0.3, 0, 0);
  const double h = 1e-4;
  QuadSpec tight;
  tight.rel_tol = 1e-9;
  tight.abs_tol = 1e-13;
  const Mat3 fd = (z_tensor(y + h * kE1, z, p, tight).value -
                   z_tensor(y - h * kE1, z, p, tight).value) / (2 * h);
  const Mat3 an = z_derivative(y, z, p, MultiIndex::unit(0), {}, tight).value;
  CHECK((an - fd).norm() <= 1e-4 * an.norm());
  CHECK((z_derivative(y, z, p, {}, {}).value - z_tensor(y, z, p).value).norm() == 0.0);
  CHECK_THROWS_AS(z_derivative(y, z, p, MultiIndex(1, 1, 1), {}), UnsupportedOrderError);

  // z-derivatives and one mixed second derivative.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int i = 0; i < 6; ++i) {
    const Vec3 yy(uni(rng) + 4.0, uni(rng), uni(rng));
    const Vec3 zz(0.3 * uni(rng), 0.3 * uni(rng), 0.3 * uni(rng));
    const int l = i % 3;
    const Vec3 e = h * Vec3::Unit(l);
    const Mat3 fz = (z_tensor(yy, zz + e, p, tight).value -
                     z_tensor(yy, zz - e, p, tight).value) / (2 * h);
    const Mat3 az = z_derivative(yy, zz, p, {}, MultiIndex::unit(l), tight).value;
    CHECK((az - fz).norm() <= 1e-4 * az.norm());
    const Mat3 fm = (z_derivative(yy + e, zz, p, {}, MultiIndex::unit(0), tight).value -
                     z_derivative(yy - e, zz, p, {}, MultiIndex::unit(0), tight).value) /
                    (2 * h);
    const Mat3 am =
        z_derivative(yy, zz, p, MultiIndex::unit(l), MultiIndex::unit(0), tight).value;
    CHECK((am - fm).norm() <= 1e-4 * am.norm());
  }
}

TEST_CASE("far-field derivative envelope downstream") {
  const FlowParams p(1.0, 1.0);
  // On the axis itself the wake profile is flat and the gradient decays
  // faster; the bound is attained across the wake at |y_perp| ~ sqrt(r).
  std::vector<double> axis, wake;
  for (double r = 5.0; r <= 200.0; r *= 2.0) {
    const Vec3 y(r, 0, 0);
    axis.push_back(z_derivative(y, Vec3::Zero(), p, MultiIndex::unit(0), {}).value.norm() *
                   std::pow(r * s_tau(y, 1.0), 1.5));
    double best = 0.0;
    for (double c : {0.0, 1.0, 2.0, 3.0}) {
      const Vec3 yc(r, c * std::sqrt(r), 0);
      for (int m = 0; m < 3; ++m) {
        const double g =
            z_derivative(yc, Vec3::Zero(), p, MultiIndex::unit(m), {}).value.norm();
        best = std::max(best, g * std::pow(yc.norm() * s_tau(yc, 1.0), 1.5));
      }
    }
    wake.push_back(best);
  }
  CHECK(std::is_sorted(axis.rbegin(), axis.rend()));
  const auto [lo, hi] = std::minmax_element(wake.begin(), wake.end());
  CHECK(*hi / *lo < 2.0);
}

TEST_CASE("kernel difference") {
  const FlowParams p(1.0, 1.0);
  const Vec3 x(6, 1, -1);
  CHECK(z_difference(x, Vec3::Zero(), p, {}).value.norm() == 0.0);
  CHECK_THROWS_AS(z_difference(Vec3::Zero(), Vec3(1, 0, 0), p, {}), SingularPointError);
  CHECK_THROWS_AS(z_difference(x, x, p, {}), SingularPointError);

  // First-order Taylor oracle in y.
  const Vec3 y = 1e-2 * Vec3(0.6, -0.8, 0.0);
  Mat3 taylor = Mat3::Zero();
  for (int k = 0; k < 3; ++k) {
    taylor += y[k] * z_derivative(x, Vec3::Zero(), p, {}, MultiIndex::unit(k)).value;
  }
  const Mat3 diff = z_difference(x, y, p, {}).value;
  CHECK((diff - taylor).norm() <= 0.05 * taylor.norm());

  // Separate integrals agree with the fused difference.
  const Vec3 y1(0.4, 0.5, -0.3);
  const Mat3 sep = z_tensor(x, y1, p).value - z_tensor(x, Vec3::Zero(), p).value;
  const Mat3 fused = z_difference(x, y1, p, {}).value;
  CHECK((sep - fused).norm() <= 1e-5 * fused.norm());
}

TEST_CASE("error estimates are honest and split-invariant") {
  const FlowParams p(1.0, 1.0);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> lr(std::log(0.05), std::log(100.0));
  QuadSpec coarse;
  QuadSpec fine = coarse;
  fine.rel_tol = 0.5 * coarse.rel_tol;
  int honest = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    Vec3 d(g(rng), g(rng), g(rng));
    const Vec3 z(0.5 * g(rng), 0.5 * g(rng), 0.5 * g(rng));
    const Vec3 y = z + std::exp(lr(rng)) * d.normalized();
    const ZValue a = z_tensor(y, z, p, coarse);
    const ZValue b = z_tensor(y, z, p, fine);
    if ((a.value - b.value).cwiseAbs().maxCoeff() <= a.error_estimate) ++honest;
    if (i % 10 == 0) {
      for (double split : {0.5, 2.0}) {
        QuadSpec s = coarse;
        s.split_point = split;
        const Mat3 v = z_tensor(y, z, p, s).value;
        CHECK((v - a.value).cwiseAbs().maxCoeff() <=
              10 * coarse.rel_tol * a.value.cwiseAbs().maxCoeff());
      }
    }
  }
  CHECK(honest == n);
}

TEST_CASE("accuracy error carries the best estimate") {
  const FlowParams p(1.0, 1.0);
  QuadSpec s;
  s.rel_tol = 1e-15;
  s.abs_tol = 1e-300;
  s.max_subdivisions = 1;
  try {
    z_tensor(Vec3(3, 1, 0), Vec3::Zero(), p, s);
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    const Mat3 ref = z_tensor(Vec3(3, 1, 0), Vec3::Zero(), p).value;
    CHECK((e.best_estimate() - ref).norm() <= 1e-3 * ref.norm());
    CHECK(e.error_estimate() > 0.0);
  }
}

TEST_CASE("scalar majorant integral against brute force") {
  const FlowParams p(1.0, 1.0);
  const Vec3 y(6, 2, 0), z(0.4, -0.3, 0.5);
  for (double nu : {1.5, 2.0, 2.5}) {
    const ScalarIntegral s = majorant_time_integral(y, z, nu, p);
    const Mat3 ref = brute_force(
        [&](double t) {
          Mat3 m = Mat3::Zero();
          m(0, 0) = std::pow(shifted_argument(y, z, t, p).squaredNorm() + t, -nu);
          return m;
        },
        4000.0);
    // Past T the integrand is below (t^2)^{-nu}; the brute force misses that.
    const double slack = std::pow(4000.0, 1.0 - 2.0 * nu) / (2.0 * nu - 1.0);
    CHECK(std::abs(s.value - ref(0, 0)) <= 1e-6 * s.value + slack);
  }
  CHECK_THROWS_AS(majorant_time_integral(y, z, 1.0, p), DomainError);
}
