#include "oseen_rotor/time_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oseen_rotor {

void QuadSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (!(split_point > 0.0) || !std::isfinite(split_point)) {
    throw DomainError("split_point must be positive");
  }
  if (max_subdivisions < 0) {
    throw DomainError("max_subdivisions must be nonnegative");
  }
}

const char* to_string(TailMap map) {
  return map == TailMap::reciprocal ? "reciprocal" : "exp";
}

TailMap tail_map_from_string(const std::string& name) {
  if (name == "reciprocal") return TailMap::reciprocal;
  if (name == "exp") return TailMap::exp;
  throw DomainError("unknown tail map '" + name + "'");
}

PeakLocation locate_peak(const Vec3& y, const Vec3& z,
                         const FlowParams& params) {
  auto phi = [&](double t) {
    return shifted_argument(y, z, t, params).squaredNorm() + t;
  };
  // Beyond t_hi the drift tau t alone exceeds |y| + |z| and phi increases.
  const double t_hi = 4.0 * (y.norm() + z.norm() + 1.0) / params.tau() + 4.0;
  const double t_lo = 1e-12;
  constexpr int kGrid = 400;
  const double ratio = std::log(t_hi / t_lo) / (kGrid - 1);

  PeakLocation best{0.0, phi(0.0)};
  int best_i = -1;
  for (int i = 0; i < kGrid; ++i) {
    const double t = t_lo * std::exp(ratio * i);
    const double v = phi(t);
    if (v < best.phi) {
      best = {t, v};
      best_i = i;
    }
  }
  if (best_i < 0) return best;

  // Golden-section refinement on the bracketing grid cell pair.
  double a = best_i > 0 ? t_lo * std::exp(ratio * (best_i - 1)) : 0.0;
  double b = t_lo * std::exp(ratio * (best_i + 1));
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = phi(c);
  double fd = phi(d);
  for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = phi(d);
    }
  }
  const double t = 0.5 * (a + b);
  const double v = phi(t);
  if (v < best.phi) best = {t, v};
  return best;
}

TimeFeatures feature_times(const std::vector<std::pair<Vec3, Vec3>>& pairs,
                           const FlowParams& params) {
  TimeFeatures out;
  const double period = 2.0 * std::numbers::pi / std::abs(params.rho());
  for (const auto& [y, z] : pairs) {
    const PeakLocation peak = locate_peak(y, z, params);
    const double width =
        2.0 * std::sqrt(std::max(peak.t, 1e-300)) / params.tau();
    if (peak.t > 0.0) out.breaks.push_back(peak.t);
    for (double k : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      if (peak.t - k * width > 0.0) out.breaks.push_back(peak.t - k * width);
      out.breaks.push_back(peak.t + k * width);
    }
    // Geometric ladder from the near-field scale |w|^2 ~ t upward.
    const double lo = std::max(peak.phi / 16.0, 1e-14);
    const double hi = std::max(4.0, 2.0 * (peak.t + 8.0 * width));
    for (double t = lo; t < hi; t *= 4.0) out.breaks.push_back(t);
    // A Gaussian peak narrower than a few periods must lie in the direct
    // piece.
    if (width < kSmoothPeriods * period) {
      out.settle = std::max(out.settle, peak.t + 8.0 * width);
    }
  }
  std::sort(out.breaks.begin(), out.breaks.end());
  out.breaks.erase(std::unique(out.breaks.begin(), out.breaks.end()),
                   out.breaks.end());
  return out;
}

double tail_start(const TimeFeatures& features, const QuadSpec& spec,
                  const FlowParams& params, double stretch) {
  const double period = 2.0 * std::numbers::pi / std::abs(params.rho());
  const double tau = params.tau();
  // Algebraic decay t^{-3} changes by a fixed factor over t / 3.
  double t = 3.0 * kSmoothPeriods * period;
  t = std::max({t, spec.split_point, features.settle});
  // The Gaussian e^{-tau^2 t / 4} must be negligible or slow.
  if (4.0 / (tau * tau) < kSmoothPeriods * period) {
    t = std::max(t, 80.0 / (tau * tau));
  }
  return period * std::ceil(stretch * t / period);
}

namespace {

ZValue to_zvalue(const TimeIntegral<Mat3>& r, const char* what) {
  if (!r.converged) {
    throw AccuracyError(std::string(what) +
                            ": adaptive quadrature did not converge within "
                            "max_subdivisions",
                        r.value, r.error);
  }
  return ZValue{r.value, r.error, r.evaluations};
}

void require_off_diagonal(const Vec3& y, const Vec3& z) {
  if (y == z) throw SingularPointError("singular: y=z");
}

}  // namespace

ZValue z_tensor(const Vec3& y, const Vec3& z, const FlowParams& params,
                const QuadSpec& spec) {
  require_off_diagonal(y, z);
  const auto features = feature_times({{y, z}}, params);
  auto f = [&](double t, double phase) -> Mat3 {
    return KernelSlice(t, phase, params).gamma(y, z);
  };
  return to_zvalue(integrate_time<Mat3>(f, features, spec, params), "z_tensor");
}

ZValue z_derivative(const Vec3& y, const Vec3& z, const FlowParams& params,
                    const MultiIndex& alpha, const MultiIndex& beta,
                    const QuadSpec& spec) {
  check_derivative_order(alpha, beta);
  require_off_diagonal(y, z);
  const auto features = feature_times({{y, z}}, params);
  auto f = [&](double t, double phase) -> Mat3 {
    return KernelSlice(t, phase, params).derivative(y, z, alpha, beta);
  };
  return to_zvalue(integrate_time<Mat3>(f, features, spec, params),
                   "z_derivative");
}

ZValue z_difference(const Vec3& x, const Vec3& y, const FlowParams& params,
                    const MultiIndex& alpha, const QuadSpec& spec) {
  check_derivative_order(alpha, MultiIndex{});
  if (y == Vec3::Zero()) return ZValue{};
  require_off_diagonal(x, y);
  if (x == Vec3::Zero()) throw SingularPointError("singular: x=0");
  const Vec3 origin = Vec3::Zero();
  const MultiIndex none;
  const auto features = feature_times({{x, y}, {x, origin}}, params);
  auto f = [&](double t, double phase) -> Mat3 {
    const KernelSlice slice(t, phase, params);
    return slice.derivative(x, y, alpha, none) -
           slice.derivative(x, origin, alpha, none);
  };
  return to_zvalue(integrate_time<Mat3>(f, features, spec, params),
                   "z_difference");
}

ScalarIntegral majorant_time_integral(const Vec3& y, const Vec3& z, double nu,
                                      const FlowParams& params,
                                      const QuadSpec& spec) {
  if (!(nu > 1.0)) throw DomainError("majorant integral needs nu > 1");
  require_off_diagonal(y, z);
  using S = Eigen::Matrix<double, 1, 1>;
  const auto features = feature_times({{y, z}}, params);
  auto f = [&](double t, double phase) -> S {
    const Vec3 w = y - params.tau() * t * kE1 - rotation(phase, params, -1) * z;
    return S::Constant(std::pow(w.squaredNorm() + t, -nu));
  };
  const auto r = integrate_time<S>(f, features, spec, params);
  if (!r.converged) {
    Mat3 best = Mat3::Zero();
    best(0, 0) = r.value(0, 0);
    throw AccuracyError("majorant_time_integral did not converge", best,
                        r.error);
  }
  return ScalarIntegral{r.value(0, 0), r.error, r.evaluations};
}

}  // namespace oseen_rotor
