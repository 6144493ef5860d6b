#include "oseen_rotor/convolution_tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "oseen_rotor/parallel.hpp"
#include "oseen_rotor/rng.hpp"
#include "oseen_rotor/wake_geometry.hpp"

namespace oseen_rotor {

namespace {

constexpr double kEq = 1e-12;

bool eq(double x, double y) { return std::abs(x - y) <= kEq; }
double star(double r) { return std::min(1.0, r); }
double min0(std::initializer_list<double> xs) { return std::min(0.0, std::min(xs)); }

}  // namespace

std::array<RegionRow, kTableRows> region_rows(const ConvInput& in) {
  const double a = in.a, b = in.b, c = in.c, d = in.d;
  const double bs = star(b), ds = star(d);
  const double m0 = 0.5 * min0({a + bs - 3.0});
  const double m1 = 0.5 * min0({c + ds - 3.0});
  const double m2 = 0.5 * min0({1.0 + bs - a, 1.0 + d - c});
  const double m3 = 0.5 * min0({1.0 + b - a, 1.0 + ds - c});
  const double m5 = 0.5 * min0({1.0 - c - d});
  const double m6 = 0.5 * min0({1.0 - a - b});
  const double m7 = 0.5 * min0({3.0 - 2.0 * b - c - d});
  const double m8 = 0.5 * min0({3.0 - a - b - 2.0 * d});
  return {{
      {0, c + m0, d + m0},
      {1, a + m1, b + m1},
      {2, a + c - 2.0 + m2, bs + d - 1.0 - m2},
      {3, a + c - 2.0 + m3, b + ds - 1.0 - m3},
      {5, a + c + d - 2.0 + m5, bs - 1.0 - m5},
      {6, a + b + c - 2.0 + m6, ds - 1.0 - m6},
      {7, a + b + c + d - 3.0 + m7, -m7},
      {8, a + b + c + d - 3.0 + m8, -m8},
      {11, a + bs + c + d - 3.0, 0.0},
      {12, a + b + c + ds - 3.0, 0.0},
  }};
}

namespace {

// Power of the logarithmic factor of a region's row, 0 when none applies.
int region_log_power(int region, const ConvInput& in) {
  const double a = in.a, b = in.b, c = in.c, d = in.d;
  const double bs = star(b), ds = star(d);
  switch (region) {
    case 0:
      if (eq(b, 1.0) && eq(a, 2.0)) return 2;
      return (eq(b, 1.0) && a < 2.0) || (!eq(b, 1.0) && eq(a + bs, 3.0)) ? 1 : 0;
    case 1:
      if (eq(d, 1.0) && eq(c, 2.0)) return 2;
      return (eq(d, 1.0) && c < 2.0) || (!eq(d, 1.0) && eq(c + ds, 3.0)) ? 1 : 0;
    case 2: {
      // Omega_2 (and Omega_4, Omega_14, which refer to it).
      if (eq(b, 1.0)) {
        if (eq(a, 2.0) || eq(1.0 + d - c, 0.0)) return 2;
        return 1;
      }
      int p = eq(std::min(1.0 + bs - a, 1.0 + d - c), 0.0) ? 1 : 0;
      if (eq(b + d, 1.0)) p = std::max(p, eq(1.0 + d - c, 0.0) ? 2 : (1.0 + d - c > 0.0 ? 1 : 0));
      return p;
    }
    case 3: {
      if (eq(d, 1.0)) {
        if (eq(c, 2.0) || eq(1.0 + b - a, 0.0)) return 2;
        return 1;
      }
      int p = eq(std::min(1.0 + b - a, 1.0 + ds - c), 0.0) ? 1 : 0;
      if (eq(b + d, 1.0)) p = std::max(p, eq(1.0 + b - a, 0.0) ? 2 : (1.0 + b - a > 0.0 ? 1 : 0));
      return p;
    }
    case 5:
      // Omega_5 with Omega_9 (b = 1 there).
      if (!eq(b, 1.0)) return 0;
      return eq(c + d, 1.0) ? 2 : 1;
    case 6:
      if (!eq(d, 1.0)) return 0;
      return eq(a + b, 1.0) ? 2 : 1;
    case 7:
      return eq(2.0 * b + c + d, 3.0) ? 1 : 0;
    case 8:
      return eq(a + b + 2.0 * d, 3.0) ? 1 : 0;
    case 11:
      return eq(b, 1.0) ? 1 : 0;
    case 12:
      return eq(d, 1.0) ? 1 : 0;
    default:
      return 0;
  }
}

}  // namespace

ConvExponents predict_exponents(const ConvInput& in) {
  const auto rows = region_rows(in);
  double e = rows[0].e;
  double ef = rows[0].e + rows[0].f;
  for (const auto& r : rows) {
    e = std::min(e, r.e);
    ef = std::min(ef, r.e + r.f);
  }
  ConvExponents out;
  out.e = e;
  out.f = ef - e;
  int best_rank = -1;
  for (const auto& r : rows) {
    const bool attains_e = eq(r.e, e);
    const bool attains_ef = eq(r.e + r.f, ef);
    if (attains_e || attains_ef) {
      out.log_power = std::max(out.log_power, region_log_power(r.region, in));
    }
    // Prefer a region attaining both minima, then the first attaining e.
    const int rank = attains_e && attains_ef ? 2 : attains_e ? 1 : 0;
    if (rank > best_rank) {
      best_rank = rank;
      out.contributing_region = r.region;
    }
  }
  return out;
}

GammaCase gamma_case(double gamma) {
  if (!(gamma > 0.25) || !std::isfinite(gamma)) {
    throw DomainError("gamma must lie in (1/4, inf)");
  }
  GammaCase g;
  g.gamma = gamma;
  g.c_out = gamma <= 2.0 ? gamma - 0.5 : 1.5;
  g.d_out = gamma <= 1.5 ? gamma : 1.5;
  g.k_out = gamma == 2.0 ? 1 : 0;
  return g;
}

namespace {

constexpr double kRadialTail = 0.25;  // kappa

struct WakeSampler {
  // Density in y of rho = |y|, v = 1 - cos(angle to e1), uniform azimuth.
  static double density(const Vec3& y) {
    const double rho = y.norm();
    if (rho == 0.0) return std::numeric_limits<double>::infinity();
    const double v = std::max(0.0, 1.0 - y[0] / rho);
    const double radial = kRadialTail * std::pow(1.0 + rho, -1.0 - kRadialTail);
    return radial * polar(rho, v) / (2.0 * std::numbers::pi * rho * rho);
  }

  static double polar(double rho, double v) {
    if (rho < 1e-6) return 0.5;
    const double norm = 2.0 * (1.0 - 1.0 / std::sqrt(1.0 + 2.0 * rho)) / rho;
    return std::pow(1.0 + rho * v, -1.5) / norm;
  }

  static Vec3 draw(double u_rho, double u_v, double u_phi) {
    const double rho = std::pow(u_rho, -1.0 / kRadialTail) - 1.0;
    double v;
    if (rho < 1e-6) {
      v = 2.0 * u_v;
    } else {
      // Inverse CDF of (1 + rho v)^{-3/2} on [0, 2].
      const double top = 1.0 - 1.0 / std::sqrt(1.0 + 2.0 * rho);
      const double w = 1.0 - u_v * top;
      v = std::clamp((1.0 / (w * w) - 1.0) / rho, 0.0, 2.0);
    }
    const double mu = 1.0 - v;
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    const double phi = 2.0 * std::numbers::pi * u_phi;
    return rho * Vec3(mu, s * std::cos(phi), s * std::sin(phi));
  }
};

double eta(const Vec3& y, double alpha, double beta) {
  return std::pow(1.0 + y.norm(), -alpha) * std::pow(s_tau(y, 1.0), -beta);
}

}  // namespace

ConvEstimate convolve_numeric(const ConvInput& in, const Vec3& x, std::int64_t budget,
                              std::uint64_t seed, int jobs) {
  const double bs = star(in.b), ds = star(in.d);
  if (!(in.a + bs + in.c + in.d > 3.0) || !(in.a + in.b + in.c + ds > 3.0)) {
    throw DivergentIntegralError(
        "convolution diverges: need a+b*+c+d > 3 and a+b+c+d* > 3");
  }
  if (budget < 2) throw DomainError("Monte-Carlo budget must be >= 2");
  if (!x.allFinite()) throw DomainError("x must be finite");

  const std::int64_t chunks = (budget + kConvChunk - 1) / kConvChunk;
  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const auto partials = parallel_map<Partial>(
      static_cast<std::size_t>(chunks), jobs, [&](std::size_t chunk) {
        const CounterRng rng(seed, chunk);
        const std::int64_t first = static_cast<std::int64_t>(chunk) * kConvChunk;
        const std::int64_t count = std::min(kConvChunk, budget - first);
        Partial p;
        for (std::int64_t i = 0; i < count; ++i) {
          const auto k = static_cast<std::uint64_t>(4 * i);
          const Vec3 step = WakeSampler::draw(rng.uniform(k), rng.uniform(k + 1),
                                              rng.uniform(k + 2));
          const Vec3 y = rng.uniform(k + 3) < 0.5 ? step : Vec3(x - step);
          const double q = 0.5 * WakeSampler::density(y) + 0.5 * WakeSampler::density(x - y);
          const double w = eta(x - y, in.a, in.b) * eta(y, in.c, in.d) / q;
          p.sum += w;
          p.sum_sq += w * w;
        }
        return p;
      });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : partials) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const double n = static_cast<double>(budget);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return ConvEstimate{mean, std::sqrt(var / (n - 1.0)), budget};
}

std::string format_exponent(double v) {
  char buf[64];
  if (!std::isfinite(v)) {
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
  for (long q = 1; q <= 1000; ++q) {
    const double p = std::round(v * static_cast<double>(q));
    if (std::abs(p / static_cast<double>(q) - v) <= 1e-12 * std::max(1.0, std::abs(v))) {
      if (q == 1) {
        std::snprintf(buf, sizeof buf, "%.0f", p);
      } else {
        std::snprintf(buf, sizeof buf, "%.0f/%ld", p, q);
      }
      return buf;
    }
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace oseen_rotor
