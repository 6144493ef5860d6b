#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "oseen_rotor/inequality_lab.hpp"
#include "oseen_rotor/rng.hpp"

using namespace oseen_rotor;

namespace {

// With z = 0 the integrand is Q(t)^{-3/2}, Q = a t^2 + b t + c, and
// int_0^inf Q^{-3/2} = [2(2at+b) / ((4ac-b^2) sqrt Q)]_0^inf.
double closed_form_nu32(const Vec3& y, double tau) {
  const double a = tau * tau;
  const double b = 1.0 - 2.0 * tau * y[0];
  const double c = y.squaredNorm();
  const double disc = 4.0 * a * c - b * b;
  return (4.0 * std::sqrt(a) - 2.0 * b / std::sqrt(c)) / disc;
}

}  // namespace

TEST_CASE("far time integral: z = 0 ratios match the closed form") {
  const FlowParams p(1.0, 1.0);
  std::vector<Vec3> ys;
  for (const Vec3 d : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(Vec3(1, 2, 2) / 3.0)}) {
    for (double r : geometric_radii(5.0, 500.0, 7)) ys.push_back(r * d);
  }
  const auto v = verify_time_integral_far(1.5, ys, {Vec3::Zero()}, p);
  double expect_max = 0.0;
  for (const Vec3& y : ys) {
    const double ratio = closed_form_nu32(y, 1.0) * y.norm() * s_tau(y, 1.0);
    expect_max = std::max(expect_max, ratio);
  }
  CHECK(v.passed);
  CHECK(v.sample_count == static_cast<int>(ys.size()));
  CHECK(v.max_ratio == doctest::Approx(expect_max).epsilon(1e-6));
  // Downstream the integral is exactly 2 / r.
  CHECK(closed_form_nu32(Vec3(50, 0, 0), 1.0) == doctest::Approx(2.0 / 50.0));
}

TEST_CASE("far time integral: nu in {3/2, 2, 5/2} with |z| = 1 stays stable") {
  const FlowParams p(1.0, 1.0);
  const CounterRng rng(11, 1);
  std::vector<Vec3> ys;
  std::vector<Vec3> zs;
  for (int i = 0; i < 60; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const double r = 5.0 * std::pow(100.0, rng.uniform(8 * k));
    ys.push_back(r * rng.unit_vector(4 * k + 1));
    zs.push_back(rng.unit_vector(4 * k + 2));
  }
  for (double nu : {1.5, 2.0, 2.5}) {
    const auto v = verify_time_integral_far(nu, ys, zs, p);
    CHECK(v.passed);
    CHECK(std::isfinite(v.max_ratio));
    CHECK(v.min_ratio > 0.0);
  }
}

TEST_CASE("far time integral preconditions") {
  const FlowParams p(1.0, 1.0);
  CHECK_THROWS_AS(verify_time_integral_far(1.5, {Vec3(3, 0, 0)}, {Vec3::Zero()}, p),
                  PreconditionError);
  CHECK_THROWS_AS(verify_time_integral_far(1.5, {Vec3(5, 0, 0)}, {Vec3(0, 2.5, 0)}, p),
                  PreconditionError);
  CHECK_THROWS_AS(verify_time_integral_far(1.0, {Vec3(5, 0, 0)}, {Vec3::Zero()}, p),
                  DomainError);
}

TEST_CASE("near time integral approaches the diagonal limits 2 and 1") {
  // Close to the diagonal only small t matter, where the integrand is
  // (eps^2 + t)^{-nu}: int = 2 / eps for nu = 3/2 and 1 / eps^2 for nu = 2.
  const FlowParams p(1.0, 1.0);
  for (int k : {0, 1}) {
    std::vector<SamplePair> pairs;
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
      pairs.push_back({Vec3(1 + e, 0, 0), Vec3(1, 0, 0)});
      pairs.push_back({Vec3(0.5, 1, 0.2 + e), Vec3(0.5, 1, 0.2)});
    }
    const auto v = verify_time_integral_near(k, 3.0, pairs, p);
    CHECK(v.passed);
    CHECK(v.spread() <= 3.0);
    const double limit = k == 0 ? 2.0 : 1.0;
    const auto tiny = verify_time_integral_near(k, 3.0, {pairs[6], pairs[7]}, p);
    CHECK(tiny.min_ratio == doctest::Approx(limit).epsilon(2e-3));
    CHECK(tiny.max_ratio == doctest::Approx(limit).epsilon(2e-3));
  }
  CHECK_THROWS_AS(verify_time_integral_near(0, 3.0, {{Vec3(1, 0, 0), Vec3(1, 0, 0)}}, p),
                  SingularPointError);
  CHECK_THROWS_AS(verify_time_integral_near(2, 3.0, {{Vec3(1, 0, 0), Vec3(0, 0, 0)}}, p),
                  UnsupportedOrderError);
  CHECK_THROWS_AS(verify_time_integral_near(0, 1.0, {{Vec3(2, 0, 0), Vec3(0, 0, 0)}}, p),
                  PreconditionError);
}

TEST_CASE("far-field Z: rays, wake slope and jobs independence") {
  const FlowParams p(1.0, 1.0);
  FarFieldOptions opt;
  opt.radii_per_ray = 6;
  opt.random_samples = 24;
  const auto v = verify_z_far_field(MultiIndex(), MultiIndex(), p, {}, opt, 1);
  REQUIRE(v.reports.size() == 3);
  CHECK(v.reports[0].fitted_slope >= -1.15);
  CHECK(v.reports[0].fitted_slope <= -0.9);
  CHECK(v.reports[1].ratio_spread() <= 5.0);
  // Ray values are plain Z norms.
  const double r0 = v.reports[0].radii[2];
  CHECK(v.reports[0].values[2] ==
        doctest::Approx(z_tensor(Vec3(r0, 0, 0), Vec3::Zero(), p).value.norm()));
  const auto w = verify_z_far_field(MultiIndex(), MultiIndex(), p, {}, opt, 3);
  CHECK(w.max_ratio == v.max_ratio);
  CHECK(w.min_ratio == v.min_ratio);
  CHECK(w.reports[1].fitted_slope == v.reports[1].fitted_slope);
}

TEST_CASE("far-field Z: first derivatives across the wake") {
  const FlowParams p(1.0, 1.0);
  FarFieldOptions opt;
  opt.radii_per_ray = 6;
  opt.random_samples = 0;
  opt.full_order = true;
  const auto v = verify_z_far_field(MultiIndex::unit(0), MultiIndex(), p, {}, opt);
  REQUIRE(v.reports.size() == 4);
  CHECK(v.reports[3].ratio_spread() <= 5.0);
  CHECK(v.passed);
  CHECK_THROWS_AS(verify_z_far_field(MultiIndex(2, 1, 0), MultiIndex(), p),
                  UnsupportedOrderError);
}

TEST_CASE("sphere lemma: value / r bounded, slope matches the closed form") {
  const auto v = verify_sphere_integral(2.0, 1.0);
  CHECK(v.passed);
  const auto& rep = v.reports.at(0);
  std::vector<double> exact;
  for (double r : rep.radii) exact.push_back(4.0 * std::numbers::pi * r * r / (1.0 + 2.0 * r));
  const auto ref = fit_decay(kE1, rep.radii, exact, [](double r) { return r; }, "r");
  CHECK(rep.fitted_slope == doctest::Approx(ref.fitted_slope).epsilon(1e-8));
  CHECK(v.max_ratio == doctest::Approx(ref.envelope_ratio_max).epsilon(1e-8));
}

TEST_CASE("shift bound stays under max(1, 2 tau)") {
  // s(x) <= s(z) + 2 tau |x - z| <= s(z) (1 + 2 tau |x - z|).
  for (double tau : {0.5, 1.0, 3.0}) {
    const auto v = verify_shift_bound(tau, 5, 20000);
    CHECK(v.passed);
    CHECK(v.max_ratio <= std::max(1.0, 2.0 * tau) + 1e-12);
  }
}

TEST_CASE("parallel_for: scheduling-independent results and first failure") {
  const auto a = parallel_map<double>(100, 1, [](std::size_t i) { return std::sqrt(double(i)); });
  const auto b = parallel_map<double>(100, 4, [](std::size_t i) { return std::sqrt(double(i)); });
  CHECK(a == b);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "7");
  }
  CHECK_THROWS_AS(parallel_for(3, 0, [](std::size_t) {}), DomainError);
}

TEST_CASE("default_jobs reads OSEEN_ROTOR_JOBS") {
  setenv("OSEEN_ROTOR_JOBS", "6", 1);
  CHECK(default_jobs() == 6);
  setenv("OSEEN_ROTOR_JOBS", "zero", 1);
  CHECK_THROWS_AS(default_jobs(), DomainError);
  unsetenv("OSEEN_ROTOR_JOBS");
  CHECK(default_jobs() == 1);
}

TEST_CASE("counter rng: pure function of (seed, stream, k)") {
  const CounterRng a(3, 9);
  const CounterRng b(3, 9);
  const CounterRng c(4, 9);
  double mean = 0.0;
  for (std::uint64_t k = 0; k < 20000; ++k) {
    const double u = a.uniform(k);
    CHECK_UNARY(u > 0.0);
    CHECK_UNARY(u < 1.0);
    mean += u;
  }
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(a.bits(17) == b.bits(17));
  CHECK(a.bits(17) != c.bits(17));
  CHECK(a.unit_vector(3).norm() == doctest::Approx(1.0));
}
