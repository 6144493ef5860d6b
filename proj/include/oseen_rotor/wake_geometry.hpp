#pragma once

// Anisotropic wake weights, sphere integrals of s_tau^{-beta}, and log-log
// decay fitting.

#include <functional>
#include <string>
#include <vector>

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

/// s_tau(x) = 1 + tau (|x| - x_1).
double s_tau(const Vec3& x, double tau);

struct WakeWeight {
  double tau = 1.0;
  double operator()(const Vec3& x) const { return s_tau(x, tau); }
};

/// eta^alpha_beta(x) = (1 + |x|)^alpha s_1(x)^beta.
struct EtaWeight {
  double alpha_exp = 0.0;
  double beta_exp = 0.0;
  double operator()(const Vec3& x) const;
};

/// Integral of s_tau^{-beta} over the sphere of radius r, as a product rule
/// (Gauss-Legendre in cos of the polar angle about e1, trapezoid in
/// azimuth). n_quad is the starting Gauss order; it is doubled until two
/// successive values agree to 1e-10 relative.
double sphere_integral_weight(double r, double beta, double tau,
                              int n_quad = 64);

struct DecayReport {
  Vec3 ray = kE1;
  std::vector<double> radii;
  std::vector<double> values;
  double fitted_slope = 0.0;
  double envelope_ratio_max = 0.0;
  double envelope_ratio_min = 0.0;
  std::string envelope;

  /// max / min of value / envelope over the samples.
  double ratio_spread() const { return envelope_ratio_max / envelope_ratio_min; }
};

/// Least-squares slope of log(value) against log(radius) and the ratio
/// envelope of value against `majorant(r)`.
DecayReport fit_decay(const Vec3& ray, const std::vector<double>& radii,
                      const std::vector<double>& values,
                      const std::function<double(double)>& majorant,
                      const std::string& envelope);

/// n radii spaced geometrically from r0 to r1 inclusive.
std::vector<double> geometric_radii(double r0, double r1, int n);

/// s_tau(x) / (s_tau(z) (1 + |x - z|)).
double shift_weight_bound(const Vec3& x, const Vec3& z, double tau);

}  // namespace oseen_rotor
