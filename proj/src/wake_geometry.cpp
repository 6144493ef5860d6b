#include "oseen_rotor/wake_geometry.hpp"

#include <cmath>
#include <numbers>

#include "oseen_rotor/quadrature.hpp"

namespace oseen_rotor {

double s_tau(const Vec3& x, double tau) {
  // |x| - x1 = (x2^2 + x3^2) / (|x| + x1) avoids cancellation downstream.
  const double r = x.norm();
  const double perp2 = x[1] * x[1] + x[2] * x[2];
  const double gap = x[0] > 0.0 ? perp2 / (r + x[0]) : r - x[0];
  return 1.0 + tau * gap;
}

double EtaWeight::operator()(const Vec3& x) const {
  return std::pow(1.0 + x.norm(), alpha_exp) * std::pow(s_tau(x, 1.0), beta_exp);
}

namespace {

double sphere_rule(double r, double beta, double tau, int n) {
  constexpr int kAzimuth = 128;
  const GaussRule g = gauss_legendre(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double mu = g.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    double ring = 0.0;
    for (int k = 0; k < kAzimuth; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / kAzimuth;
      const Vec3 x = r * Vec3(mu, st * std::cos(phi), st * std::sin(phi));
      ring += std::pow(s_tau(x, tau), -beta);
    }
    sum += g.weights[i] * ring * (2.0 * std::numbers::pi / kAzimuth);
  }
  return r * r * sum;
}

}  // namespace

double sphere_integral_weight(double r, double beta, double tau, int n_quad) {
  if (!(r > 0.0)) throw DomainError("sphere radius must be positive");
  if (!(beta > 1.0)) throw DomainError("sphere integral needs beta > 1");
  if (tau < 0.0) throw DomainError("tau must be nonnegative");
  if (n_quad < 2) throw DomainError("n_quad must be at least 2");
  int n = n_quad;
  double prev = sphere_rule(r, beta, tau, n);
  for (int iter = 0; iter < 12; ++iter) {
    n *= 2;
    const double next = sphere_rule(r, beta, tau, n);
    if (std::abs(next - prev) <= 1e-10 * std::abs(next)) return next;
    prev = next;
  }
  throw AccuracyError("sphere_integral_weight did not converge",
                      Mat3::Constant(prev), std::abs(prev));
}

DecayReport fit_decay(const Vec3& ray, const std::vector<double>& radii,
                      const std::vector<double>& values,
                      const std::function<double(double)>& majorant,
                      const std::string& envelope) {
  if (radii.size() != values.size()) {
    throw DataError("radii and values differ in length");
  }
  if (radii.size() < 4) throw DataError("decay fit needs at least 4 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw DataError("radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      throw DataError("radii must be strictly increasing");
    }
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw DataError("decay fit needs positive finite values");
    }
  }
  DecayReport rep;
  rep.ray = ray.normalized();
  rep.radii = radii;
  rep.values = values;
  rep.envelope = envelope;

  const double n = static_cast<double>(radii.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    mx += std::log(radii[i]);
    my += std::log(values[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double dx = std::log(radii[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  rep.fitted_slope = sxy / sxx;

  rep.envelope_ratio_max = 0.0;
  rep.envelope_ratio_min = INFINITY;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double ratio = values[i] / majorant(radii[i]);
    rep.envelope_ratio_max = std::max(rep.envelope_ratio_max, ratio);
    rep.envelope_ratio_min = std::min(rep.envelope_ratio_min, ratio);
  }
  return rep;
}

std::vector<double> geometric_radii(double r0, double r1, int n) {
  if (!(r0 > 0.0) || !(r1 > r0) || n < 2) {
    throw DomainError("geometric_radii needs 0 < r0 < r1 and n >= 2");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  const double q = std::log(r1 / r0) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = r0 * std::exp(q * i);
  out.back() = r1;
  return out;
}

double shift_weight_bound(const Vec3& x, const Vec3& z, double tau) {
  return s_tau(x, tau) / (s_tau(z, tau) * (1.0 + (x - z).norm()));
}

}  // namespace oseen_rotor
