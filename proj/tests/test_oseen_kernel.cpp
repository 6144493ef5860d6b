#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oseen_rotor/oseen_kernel.hpp"
#include "oseen_rotor/scalar_kernels.hpp"

using namespace oseen_rotor;
using std::numbers::pi;

namespace {

Mat3 fd_y(const Vec3& y, const Vec3& z, double t, const FlowParams& p, int m,
          double h) {
  const Vec3 e = h * Vec3::Unit(m);
  return (gamma_kernel(y + e, z, t, p) - gamma_kernel(y - e, z, t, p)) / (2 * h);
}

Mat3 fd_z(const Vec3& y, const Vec3& z, double t, const FlowParams& p, int l,
          double h) {
  const Vec3 e = h * Vec3::Unit(l);
  return (gamma_kernel(y, z + e, t, p) - gamma_kernel(y, z - e, t, p)) / (2 * h);
}

// Truncated exponential series of t*Omega, independent of the closed form.
Mat3 expm_series(const Mat3& a) {
  Mat3 sum = Mat3::Identity();
  Mat3 term = Mat3::Identity();
  for (int k = 1; k < 60; ++k) {
    term = term * a / k;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("flow parameters and multi-indices validate") {
  CHECK_THROWS_AS(FlowParams(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(FlowParams(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(MultiIndex(-1, 0, 0), DomainError);
  CHECK(MultiIndex(1, 0, 1).order() == 2);
  CHECK_THROWS_AS(check_derivative_order(MultiIndex(2, 0, 0), MultiIndex(0, 1, 0)),
                  UnsupportedOrderError);
}

TEST_CASE("rotation closed form") {
  const FlowParams p(1.0, 1.0);
  CHECK((rotation(0.0, p, 1) - Mat3::Identity()).norm() == 0.0);
  CHECK((rotation(pi / 2, p, 1) * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm() < 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ut(-20.0, 20.0);
  const FlowParams q(0.7, -2.3);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng);
    const Mat3 r = rotation(t, q, 1);
    CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-14);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((r * rotation(t, q, -1) - Mat3::Identity()).norm() < 1e-14);
  }
  for (double t : {0.1, 0.8, 2.5}) {
    CHECK((rotation(t, q, 1) - expm_series(t * omega_matrix(q))).norm() < 1e-12);
    CHECK((rotation(t, q, -1) - expm_series(-t * omega_matrix(q))).norm() < 1e-12);
  }
  // omega x v = Omega v
  const Vec3 v(0.3, -1.0, 2.0);
  CHECK((omega_matrix(q) * v - q.omega().cross(v)).norm() < 1e-15);
}

TEST_CASE("gamma kernel composition") {
  const FlowParams p(1.0, 1.0);
  const Mat3 g = gamma_kernel(Vec3::Zero(), Vec3::Zero(), 1.0, p);
  CHECK((g - lambda_tensor(Vec3(-1, 0, 0), 1.0) * rotation(1.0, p, -1)).norm() < 1e-16);
  const Vec3 y(1.5, -0.3, 2.0);
  CHECK((gamma_kernel(y, Vec3::Zero(), 0.4, p) -
         lambda_tensor(y - 0.4 * kE1, 0.4) * rotation(0.4, p, -1)).norm() < 1e-16);
  CHECK_THROWS_AS(gamma_kernel(y, y, 0.0, p), DomainError);

  const KernelPoint kp = make_kernel_point(y, Vec3(1, 1, 0), 0.3, p);
  CHECK((kp.shifted - shifted_argument(y, Vec3(1, 1, 0), 0.3, p)).norm() == 0.0);

  // Continuity across shifted -> 0.
  const double t = 0.5;
  const Vec3 z(0.2, 0.4, -0.1);
  const Vec3 y0 = z.x() * kE1 + rotation(t, p, -1) * Vec3(0, z.y(), z.z()) + p.tau() * t * kE1;
  const Mat3 at0 = gamma_kernel(y0, z, t, p);
  CHECK(shifted_argument(y0, z, t, p).norm() < 1e-15);
  const Mat3 near = gamma_kernel(y0 + Vec3(1e-6, 0, 0), z, t, p);
  CHECK((near - at0).norm() <= 1e-6 * at0.norm());
}

TEST_CASE("first derivatives against finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  std::uniform_real_distribution<double> ut(0.05, 3.0);
  const FlowParams p(1.0, 1.0);
  int tested = 0;
  while (tested < 100) {
    const Vec3 y(uni(rng), uni(rng), uni(rng));
    const Vec3 z(uni(rng), uni(rng), uni(rng));
    const double t = ut(rng);
    if (shifted_argument(y, z, t, p).squaredNorm() + t < 0.1) continue;
    ++tested;
    for (int m = 0; m < 3; ++m) {
      const Mat3 an = gamma_derivative(y, z, t, p, MultiIndex::unit(m), MultiIndex{});
      const Mat3 fd = fd_y(y, z, t, p, m, 1e-5);
      CHECK((an - fd).norm() <= 1e-4 * std::max(an.norm(), 1e-3 * gamma_kernel(y, z, t, p).norm()));
      const Mat3 bz = gamma_derivative(y, z, t, p, MultiIndex{}, MultiIndex::unit(m));
      const Mat3 fz = fd_z(y, z, t, p, m, 1e-5);
      CHECK((bz - fz).norm() <= 1e-4 * std::max(bz.norm(), 1e-3 * gamma_kernel(y, z, t, p).norm()));
    }
  }
  // The worked configuration.
  const Vec3 y(3, 1, 0), z(0.2, 0, 0.1);
  const Mat3 an = gamma_derivative(y, z, 0.7, p, MultiIndex::unit(0), MultiIndex{});
  CHECK((an - fd_y(y, z, 0.7, p, 0, 1e-5)).norm() <= 1e-5 * an.norm());
  CHECK((gamma_derivative(y, z, 0.7, p, MultiIndex{}, MultiIndex{}) -
         gamma_kernel(y, z, 0.7, p)).norm() == 0.0);
}

TEST_CASE("second derivatives against finite differences of first") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  const FlowParams p(0.8, 1.7);
  const double h = 1e-5;
  for (int i = 0; i < 30; ++i) {
    const Vec3 y(uni(rng), uni(rng), uni(rng));
    const Vec3 z(uni(rng), uni(rng), uni(rng));
    const double t = 0.2 + std::abs(uni(rng));
    for (int m = 0; m < 3; ++m) {
      for (int l = 0; l < 3; ++l) {
        const MultiIndex a = MultiIndex::unit(m);
        const MultiIndex b = MultiIndex::unit(l);
        const Vec3 e = h * Vec3::Unit(l);
        // d_y_m d_z_l
        const Mat3 mixed = gamma_derivative(y, z, t, p, a, b);
        const Mat3 fd = (gamma_derivative(y, z + e, t, p, a, {}) -
                         gamma_derivative(y, z - e, t, p, a, {})) / (2 * h);
        const double scale = gamma_derivative(y, z, t, p, a, {}).norm() + mixed.norm();
        CHECK((mixed - fd).norm() <= 1e-5 * scale);
        // d_y_m d_y_l
        MultiIndex aa = a;
        aa.a[static_cast<std::size_t>(l)] += 1;
        const Mat3 yy = gamma_derivative(y, z, t, p, aa, {});
        const Mat3 fy = (gamma_derivative(y + e, z, t, p, a, {}) -
                         gamma_derivative(y - e, z, t, p, a, {})) / (2 * h);
        CHECK((yy - fy).norm() <= 1e-5 * (scale + yy.norm()));
        // d_z_m d_z_l
        MultiIndex bb = b;
        bb.a[static_cast<std::size_t>(m)] += 1;
        const Mat3 zz = gamma_derivative(y, z, t, p, {}, bb);
        const Mat3 fz = (gamma_derivative(y, z + h * Vec3::Unit(m), t, p, {}, b) -
                         gamma_derivative(y, z - h * Vec3::Unit(m), t, p, {}, b)) / (2 * h);
        CHECK((zz - fz).norm() <= 1e-5 * (scale + zz.norm()));
      }
    }
  }
  CHECK_THROWS_AS(gamma_derivative(Vec3(1, 0, 0), Vec3::Zero(), 1.0, p, MultiIndex(1, 1, 0),
                                   MultiIndex(0, 0, 1)),
                  UnsupportedOrderError);
}

TEST_CASE("slice helpers agree with the free functions") {
  const FlowParams p(1.3, 0.6);
  const KernelSlice s(0.9, p);
  const Vec3 y(2, -1, 0.5), z(0.3, 0.2, -0.4);
  Mat3 v;
  std::array<Mat3, 3> dz;
  s.gamma_with_z_gradient(y, z, -1, v, dz);
  CHECK((v - gamma_kernel(y, z, 0.9, p)).norm() < 1e-16);
  for (int l = 0; l < 3; ++l) {
    CHECK((dz[static_cast<std::size_t>(l)] -
           gamma_derivative(y, z, 0.9, p, {}, MultiIndex::unit(l))).norm() < 1e-16);
  }
  s.gamma_with_z_gradient(y, z, 1, v, dz);
  CHECK((v - gamma_derivative(y, z, 0.9, p, MultiIndex::unit(1), {})).norm() < 1e-16);
  CHECK((dz[2] - gamma_derivative(y, z, 0.9, p, MultiIndex::unit(1), MultiIndex::unit(2)))
            .norm() < 1e-16);
}

TEST_CASE("majorant values and domination") {
  const FlowParams p(1.0, 1.0);
  // shifted = 0 at t = 1 with z = 0 requires y = tau e1.
  CHECK(majorant(Vec3(1, 0, 0), Vec3::Zero(), 1.0, p, 0) == doctest::Approx(1.0));
  CHECK(majorant(Vec3(1, 0, 0), Vec3::Zero(), 0.0, p, 1) == doctest::Approx(1.0));
  CHECK(majorant(Vec3(3, 0, 0), Vec3::Zero(), 1.0, p, 2) ==
        doctest::Approx(std::pow(5.0, -2.5)));
  CHECK_THROWS_AS(majorant(Vec3(1, 0, 0), Vec3::Zero(), -1.0, p, 0), DomainError);
  CHECK_THROWS_AS(majorant(Vec3(1, 0, 0), Vec3::Zero(), 1.0, p, 3), UnsupportedOrderError);

  // Fit one constant per order on one sample, re-verify on a fresh one.
  auto sample_max = [&](unsigned seed, int order) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    std::uniform_real_distribution<double> lt(-6.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Vec3 y(uni(rng), uni(rng), uni(rng));
      const Vec3 z(uni(rng), uni(rng), uni(rng));
      const double t = std::pow(10.0, lt(rng));
      MultiIndex a, b;
      if (order >= 1) a = MultiIndex::unit(i % 3);
      if (order == 2) b = MultiIndex::unit((i / 3) % 3);
      const double g = gamma_derivative(y, z, t, p, a, b).norm();
      worst = std::max(worst, g / majorant(y, z, t, p, order));
    }
    return worst;
  };
  for (int order = 0; order <= 2; ++order) {
    const double c = sample_max(100, order);
    CHECK(std::isfinite(c));
    CHECK(sample_max(200, order) <= 1.25 * c);
  }
}
