#pragma once

// Scalar building blocks of the rotating Oseen kernel: the heat kernel, the
// Kummer function 1F1(1, c, u) and its exponentially damped form, the
// projector N(x) = x x^T / |x|^2, the tensor Lambda(x, t) and the pressure
// kernel E4.
//
// All functions are pure and thread-safe.

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

/// Argument threshold separating the power series from the asymptotic
/// expansion of the damped Kummer function.
inline constexpr double kKummerSeriesLimit = 30.0;

/// Above this u every Gaussian factor in Lambda is exactly zero in double
/// precision and Lambda(x, t) no longer depends on t.
inline constexpr double kAlgebraicRegime = 1e4;

/// exp(-u) with the convention that arguments beyond the double range
/// underflow to exactly zero.
double exp_neg(double u);

/// (4 pi t)^{-3/2} exp(-|x|^2 / (4t)).
double heat_kernel(const Vec3& x, double t);

/// 1F1(1, 5/2, u) for u >= 0. Overflows to +inf once e^u does (u > ~709);
/// use damped_kummer() wherever the product with a Gaussian is needed.
double kummer_1(double u);

/// e^{-u} 1F1(1, 5/2, u), finite for every u >= 0.
double damped_kummer(double u);

/// e^{-u} 1F1(1, c, u) for c > 0, u >= 0. Series for u <= 30, eight-term
/// asymptotic expansion above.
double damped_kummer_c(double c, double u);

/// N_jk = x_j x_k / |x|^2.
Mat3 projector(const Vec3& x);

/// Radial profile of Lambda. With c0 = (4 pi t)^{-3/2} and u = |x|^2/(4t),
///
///   Lambda(x, t) = c0 * [ a(u) I + h(u) x x^T / (4t) ],
///
/// where a = e^{-u} - D_{5/2}/3 and h = (D_{5/2} - e^{-u}) / u = (2/5) D_{7/2}
/// (D_c = damped Kummer with parameter c). Both are smooth at u = 0, so the
/// tensor and its derivatives need no special branch at the origin.
struct LambdaProfile {
  double a = 0.0;
  double da = 0.0;
  double d2a = 0.0;
  double h = 0.0;
  double dh = 0.0;
  double d2h = 0.0;
};

LambdaProfile lambda_profile(double u);

/// Lambda and its directional derivatives at one (x, t), sharing a single
/// profile evaluation.
class LambdaJet {
 public:
  LambdaJet(const Vec3& x, double t);

  Mat3 value() const;
  Mat3 d1(const Vec3& v) const;
  Mat3 d2(const Vec3& v, const Vec3& w) const;

 private:
  Vec3 x_;
  double t_;
  double c0_;
  LambdaProfile p_;
};

/// Lambda_jk(x, t) = K [ delta - N - 1F1(1,5/2,u) (delta/3 - N) ], continuously
/// extended to x = 0 by (2/3) K(0, t) I.
Mat3 lambda_tensor(const Vec3& x, double t);

/// Directional derivative d/ds Lambda(x + s v, t) at s = 0.
Mat3 lambda_tensor_d1(const Vec3& x, double t, const Vec3& v);

/// Second directional derivative d^2/(ds dr) Lambda(x + s v + r w, t).
Mat3 lambda_tensor_d2(const Vec3& x, double t, const Vec3& v, const Vec3& w);

/// E4_j(x) = (4 pi)^{-1} x_j |x|^{-3}.
Vec3 pressure_kernel(const Vec3& x);

/// Jacobian of E4: entry (j, m) = d E4_j / d x_m.
Mat3 pressure_kernel_gradient(const Vec3& x);

}  // namespace oseen_rotor
