#pragma once

// Time integrals over (0, inf) of the rotating Oseen kernel:
//
//   Z(y, z) = int_0^inf Gamma(y, z, t) dt
//
// and its derivatives. Feature times of the integrand (the minimiser of
// |y - tau t e1 - e^{-t Omega} z|^2 + t, its Gaussian width, and a geometric
// ladder down to the near-field scale) become forced panel boundaries for the
// adaptive Gauss-Kronrod rule. The slowly decaying, rotating tail is summed
// period by period (see integrate_time).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "oseen_rotor/oseen_kernel.hpp"
#include "oseen_rotor/quadrature.hpp"

namespace oseen_rotor {

enum class TailMap { reciprocal, exp };

struct QuadSpec {
  double rel_tol = 1e-6;
  double abs_tol = 1e-10;
  double split_point = 1.0;
  int max_subdivisions = 60;
  TailMap tail_map = TailMap::reciprocal;

  void validate() const;
};

const char* to_string(TailMap map);
TailMap tail_map_from_string(const std::string& name);

struct ZValue {
  Mat3 value = Mat3::Zero();
  double error_estimate = 0.0;
  int evaluations = 0;
};

/// Minimiser t* of |y - tau t e1 - e^{-t Omega} z|^2 + t over t >= 0 and the
/// minimum value.
struct PeakLocation {
  double t = 0.0;
  double phi = 0.0;
};

PeakLocation locate_peak(const Vec3& y, const Vec3& z,
                         const FlowParams& params);

/// Forced breakpoints for a family of (y, z) pairs, and the time after which
/// every pair's integrand varies slowly on the scale of one rotation period.
struct TimeFeatures {
  std::vector<double> breaks;
  double settle = 0.0;
};

TimeFeatures feature_times(const std::vector<std::pair<Vec3, Vec3>>& pairs,
                           const FlowParams& params);

template <class V>
struct TimeIntegral {
  V value;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Slow scales must span at least this many rotation periods before the
/// periodic tail summation takes over.
inline constexpr double kSmoothPeriods = 6.0;

/// Start of the periodic tail: a whole number of rotation periods past every
/// sharp feature. `stretch` > 1 pushes it further out (used by the exp map so
/// that the two schemes share no nodes).
double tail_start(const TimeFeatures& features, const QuadSpec& spec,
                  const FlowParams& params, double stretch);

namespace detail {

// Gregory end correction for sum_{k>=0} phi_k - int_0^inf phi, from the
// forward differences of phi_0..phi_5. The last term is the error proxy.
template <class V>
V gregory_correction(const std::array<V, 6>& phi, double& error) {
  std::array<V, 6> d = phi;
  std::array<V, 6> delta;
  delta[0] = d[0];
  for (int order = 1; order < 6; ++order) {
    for (int k = 0; k + order < 6; ++k) d[k] = d[k + 1] - d[k];
    delta[order] = d[0];
  }
  static constexpr double kCoef[6] = {0.5,           -1.0 / 12.0,  1.0 / 24.0,
                                      -19.0 / 720.0, 3.0 / 160.0, -863.0 / 60480.0};
  V out = kCoef[0] * delta[0];
  for (int j = 1; j < 6; ++j) out += kCoef[j] * delta[j];
  error = std::abs(kCoef[5]) * abs_max<V>(delta[5]);
  return out;
}

}  // namespace detail

/// Integrates f(t, phase) over t in (0, inf) with phase = t, where `phase`
/// is the time at which e^{-t Omega} is taken and t the heat/drift time.
///
/// [0, T0] is one adaptive piece: t = split sigma^2 on [0, split], then the
/// tail map of `spec` up to T0. Past T0 (a multiple of the period P of
/// e^{-t Omega}) the rotation is periodic while everything else varies
/// slowly, so
///
///   int_T0^inf f = int_0^P sum_k f(T0 + theta + k P, theta) dtheta,
///
/// and each lattice sum is a smooth function of k evaluated by Gregory's
/// formula: a non-oscillatory integral plus forward-difference corrections.
template <class V, class F>
TimeIntegral<V> integrate_time(F&& f, const TimeFeatures& features,
                               const QuadSpec& spec, const FlowParams& params) {
  spec.validate();
  const double split = spec.split_point;
  const double period = 2.0 * std::numbers::pi / std::abs(params.rho());
  const bool recip = spec.tail_map == TailMap::reciprocal;
  const double t0 = tail_start(features, spec, params, recip ? 1.0 : 2.0);

  TimeIntegral<V> out;
  int evaluations = 0;

  // Periodic tail.
  double worst_inner = 0.0;
  bool inner_ok = true;
  const AdaptiveOptions inner_opt{0.1 * spec.rel_tol, 0.01 * spec.abs_tol / period,
                                  spec.max_subdivisions};
  auto lattice_sum = [&](double theta) -> V {
    const double start = t0 + theta;
    std::array<V, 6> phi;
    for (int k = 0; k < 6; ++k) phi[k] = f(start + k * period, start);
    evaluations += 6;
    double greg_err = 0.0;
    const V corr = detail::gregory_correction<V>(phi, greg_err);
    // (1/P) int_start^inf f(s, start) ds with s = start / v.
    std::vector<double> vb{0.0, 0.5, 1.0};
    for (double t : features.breaks) {
      if (t > start) vb.push_back(start / t);
    }
    std::sort(vb.begin(), vb.end());
    auto g = [&](double v) -> V {
      const double s = start / v;
      return f(s, start) * (start / (v * v * period));
    };
    const AdaptiveResult<V> in = integrate_adaptive<V>(g, vb, inner_opt);
    evaluations += in.evaluations;
    inner_ok = inner_ok && in.converged;
    worst_inner = std::max(worst_inner, in.error + greg_err);
    return in.value + corr;
  };
  const AdaptiveOptions tail_opt{spec.rel_tol, 0.25 * spec.abs_tol,
                                 spec.max_subdivisions};
  const std::vector<double> theta_breaks{0.0, 0.25 * period, 0.5 * period,
                                         0.75 * period, period};
  const AdaptiveResult<V> tail =
      integrate_adaptive<V>(lattice_sum, theta_breaks, tail_opt);

  // Direct piece on [0, T0]:
  //   sigma in [0, 1]:      t = split sigma^2
  //   sigma in [1, 1 + L]:  reciprocal: t = split / (2 - sigma)
  //                         exp:        t = split e^{sigma - 1}
  const double tail_len = recip ? 1.0 - split / t0 : std::log(t0 / split);
  auto to_sigma = [&](double t) {
    if (t <= split) return std::sqrt(t / split);
    return recip ? 2.0 - split / t : 1.0 + std::log(t / split);
  };
  auto g = [&](double sigma) -> V {
    if (sigma <= 1.0) {
      const double t = split * sigma * sigma;
      return f(t, t) * (2.0 * split * sigma);
    }
    if (recip) {
      const double s = 2.0 - sigma;
      const double t = split / s;
      return f(t, t) * (split / (s * s));
    }
    const double t = split * std::exp(sigma - 1.0);
    return f(t, t) * t;
  };
  std::vector<double> breaks{0.0, 1.0, 1.0 + tail_len};
  for (double t : features.breaks) {
    if (t > 0.0 && t < t0) breaks.push_back(to_sigma(t));
  }
  // e^{-t Omega} turns over every P / 2.
  for (double t = 0.5 * period; t < t0; t += 0.5 * period) {
    breaks.push_back(to_sigma(t));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const AdaptiveOptions head_opt{spec.rel_tol, 0.5 * spec.abs_tol,
                                 spec.max_subdivisions};
  const AdaptiveResult<V> head =
      integrate_adaptive<V>(g, breaks, head_opt, &tail.value);

  out.value = head.value + tail.value;
  out.error = head.error + tail.error + period * worst_inner;
  out.evaluations = evaluations + head.evaluations;
  out.converged = head.converged && tail.converged && inner_ok;
  return out;
}

/// Z(y, z) = int_0^inf Gamma(y, z, t) dt.
ZValue z_tensor(const Vec3& y, const Vec3& z, const FlowParams& params,
                const QuadSpec& spec = {});

/// d_y^alpha d_z^beta Z(y, z), differentiated under the integral.
ZValue z_derivative(const Vec3& y, const Vec3& z, const FlowParams& params,
                    const MultiIndex& alpha, const MultiIndex& beta,
                    const QuadSpec& spec = {});

/// d_x^alpha (Z(x, y) - Z(x, 0)) in one quadrature with shared nodes.
ZValue z_difference(const Vec3& x, const Vec3& y, const FlowParams& params,
                    const MultiIndex& alpha, const QuadSpec& spec = {});

/// int_0^inf (|y - tau t e1 - e^{-t Omega} z|^2 + t)^{-nu} dt.
struct ScalarIntegral {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

ScalarIntegral majorant_time_integral(const Vec3& y, const Vec3& z, double nu,
                                      const FlowParams& params,
                                      const QuadSpec& spec = {});

}  // namespace oseen_rotor
