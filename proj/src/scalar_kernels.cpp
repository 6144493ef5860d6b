#include "oseen_rotor/scalar_kernels.hpp"

#include <cmath>
#include <numbers>

namespace oseen_rotor {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExpUnderflow = 745.0;
// Gamma(11/2), the only parameter hit on the hot path
const double kGamma11Half = std::tgamma(5.5);

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("time must be positive and finite, got t=" +
                      std::to_string(t));
  }
}

void require_kummer_arg(double u) {
  if (!(u >= 0.0) || std::isnan(u)) {
    throw DomainError("Kummer argument must be >= 0, got u=" +
                      std::to_string(u));
  }
}

// sum_n Gamma(c)/Gamma(n+c) u^n via term_{n+1} = term_n u/(n+c). All terms
// are positive, so the sum carries full relative precision.
double kummer_series(double c, double u) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 2000; ++n) {
    term *= u / (n + c);
    sum += term;
    if (n > u && term < 1e-17 * sum) break;
  }
  return sum;
}

// e^{-u} 1F1(1,c,u) = Gamma(c) u^{1-c} - (c-1)/u e^{-u} sum_s (2-c)_s (-1/u)^s
double damped_kummer_asymptotic(double c, double u) {
  const double gamma_c = c == 5.5 ? kGamma11Half : std::tgamma(c);
  const double lead = gamma_c * std::pow(u, 1.0 - c);
  const double damp = exp_neg(u);
  if (damp == 0.0) return lead;
  double term = 1.0;
  double sum = 1.0;
  for (int s = 0; s < 7; ++s) {
    term *= -(2.0 - c + s) / u;
    sum += term;
  }
  return lead - (c - 1.0) / u * damp * sum;
}

double c0_of(double t) { return std::pow(4.0 * kPi * t, -1.5); }

}  // namespace

double exp_neg(double u) { return u > kExpUnderflow ? 0.0 : std::exp(-u); }

double heat_kernel(const Vec3& x, double t) {
  require_time(t);
  const double u = x.squaredNorm() / (4.0 * t);
  return c0_of(t) * exp_neg(u);
}

double kummer_1(double u) {
  require_kummer_arg(u);
  if (u <= kKummerSeriesLimit) return kummer_series(2.5, u);
  const double damp = exp_neg(u);
  if (damp == 0.0) return HUGE_VAL;
  return damped_kummer_asymptotic(2.5, u) / damp;
}

double damped_kummer(double u) { return damped_kummer_c(2.5, u); }

double damped_kummer_c(double c, double u) {
  require_kummer_arg(u);
  if (!(c > 0.0)) throw DomainError("Kummer parameter c must be positive");
  if (std::isinf(u)) return 0.0;
  if (u <= kKummerSeriesLimit) return exp_neg(u) * kummer_series(c, u);
  return damped_kummer_asymptotic(c, u);
}

Mat3 projector(const Vec3& x) {
  const double r2 = x.squaredNorm();
  if (!(r2 > 0.0)) throw DomainError("projector undefined at x = 0");
  return x * x.transpose() / r2;
}

LambdaProfile lambda_profile(double u) {
  require_kummer_arg(u);
  // D_{11/2} directly, then the downward recurrence
  // D_c = e^{-u} + u D_{c+1} / c, which only adds positive terms.
  const double e = exp_neg(u);
  const double d11 = damped_kummer_c(5.5, u);
  const double d9 = e + u * d11 / 4.5;
  const double d7 = e + u * d9 / 3.5;
  const double d5 = e + u * d7 / 2.5;

  LambdaProfile p;
  p.h = 0.4 * d7;
  p.dh = -(2.0 / 7.0) * d9;
  p.d2h = (2.0 / 9.0) * d11;
  p.a = e - d5 / 3.0;
  p.da = -e + 0.5 * p.h;
  p.d2a = e + 0.5 * p.dh;
  return p;
}

LambdaJet::LambdaJet(const Vec3& x, double t) : x_(x), t_(t) {
  require_time(t);
  const double r2 = x.squaredNorm();
  double u = r2 / (4.0 * t);
  // Once e^{-u} underflows the profile is a pure power of u and Lambda is
  // homogeneous in x alone, so any time with the same regime gives the same
  // tensor. Pinning u keeps (4 pi t)^{-3/2} representable as t -> 0.
  if (u > kAlgebraicRegime) {
    u = kAlgebraicRegime;
    t_ = r2 / (4.0 * u);
  }
  p_ = lambda_profile(u);
  c0_ = c0_of(t_);
}

Mat3 LambdaJet::value() const {
  return c0_ * (p_.a * Mat3::Identity() +
                p_.h / (4.0 * t_) * (x_ * x_.transpose()));
}

Mat3 LambdaJet::d1(const Vec3& v) const {
  const double t = t_;
  const double xv = x_.dot(v);
  const Mat3 xx = x_ * x_.transpose();
  const Mat3 sym = v * x_.transpose() + x_ * v.transpose();
  return c0_ * (p_.da * xv / (2.0 * t) * Mat3::Identity() +
                p_.dh * xv / (8.0 * t * t) * xx + p_.h / (4.0 * t) * sym);
}

Mat3 LambdaJet::d2(const Vec3& v, const Vec3& w) const {
  const double t = t_;
  const double xv = x_.dot(v);
  const double xw = x_.dot(w);
  const double vw = v.dot(w);
  const Mat3 xx = x_ * x_.transpose();
  const Mat3 sym_v = v * x_.transpose() + x_ * v.transpose();
  const Mat3 sym_w = w * x_.transpose() + x_ * w.transpose();
  const Mat3 sym_vw = v * w.transpose() + w * v.transpose();
  const double t2 = t * t;
  return c0_ * ((p_.d2a * xv * xw / (4.0 * t2) + p_.da * vw / (2.0 * t)) *
                    Mat3::Identity() +
                p_.d2h * xv * xw / (16.0 * t2 * t) * xx +
                p_.dh / (8.0 * t2) * (vw * xx + xv * sym_w + xw * sym_v) +
                p_.h / (4.0 * t) * sym_vw);
}

Mat3 lambda_tensor(const Vec3& x, double t) { return LambdaJet(x, t).value(); }

Mat3 lambda_tensor_d1(const Vec3& x, double t, const Vec3& v) {
  return LambdaJet(x, t).d1(v);
}

Mat3 lambda_tensor_d2(const Vec3& x, double t, const Vec3& v, const Vec3& w) {
  return LambdaJet(x, t).d2(v, w);
}

Vec3 pressure_kernel(const Vec3& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("pressure kernel undefined at x = 0");
  return x / (4.0 * kPi * r * r * r);
}

Mat3 pressure_kernel_gradient(const Vec3& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("pressure kernel undefined at x = 0");
  const double r3 = r * r * r;
  return (Mat3::Identity() / r3 - 3.0 * (x * x.transpose()) / (r3 * r * r)) /
         (4.0 * kPi);
}

}  // namespace oseen_rotor
