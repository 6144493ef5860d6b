#pragma once

// The time-dependent rotating Oseen kernel
//
//   Gamma(y, z, t) = Lambda(y - tau t e1 - e^{-t Omega} z, t) e^{-t Omega},
//
// its spatial derivatives of total order <= 2, and the pointwise majorant
// (|y - tau t e1 - e^{-t Omega} z|^2 + t)^{-3/2 - k/2}.

#include <array>

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

/// Reynolds number tau > 0 and Taylor number rho != 0 (omega = rho e1).
class FlowParams {
 public:
  FlowParams() = default;
  FlowParams(double tau, double rho);

  double tau() const { return tau_; }
  double rho() const { return rho_; }
  Vec3 omega() const { return rho_ * kE1; }

 private:
  double tau_ = 1.0;
  double rho_ = 1.0;
};

/// Derivative multi-index alpha in N_0^3.
struct MultiIndex {
  std::array<int, 3> a{0, 0, 0};

  MultiIndex() = default;
  MultiIndex(int a1, int a2, int a3);

  static MultiIndex unit(int axis);

  int order() const { return a[0] + a[1] + a[2]; }
  bool operator==(const MultiIndex&) const = default;
};

inline constexpr int kMaxDerivativeOrder = 2;

/// Omega with omega x v = Omega v.
Mat3 omega_matrix(const FlowParams& params);

/// e^{sign t Omega}: rotation about e1 by the angle sign * rho * t.
Mat3 rotation(double t, const FlowParams& params, int sign);

/// Cached argument of Lambda inside Gamma.
struct KernelPoint {
  Vec3 y;
  Vec3 z;
  double t = 0.0;
  Vec3 shifted;
};

KernelPoint make_kernel_point(const Vec3& y, const Vec3& z, double t,
                              const FlowParams& params);

/// y - tau t e1 - e^{-t Omega} z
Vec3 shifted_argument(const Vec3& y, const Vec3& z, double t,
                      const FlowParams& params);

Mat3 gamma_kernel(const Vec3& y, const Vec3& z, double t,
                  const FlowParams& params);

/// d_y^alpha d_z^beta Gamma(y, z, t) for |alpha + beta| <= 2.
Mat3 gamma_derivative(const Vec3& y, const Vec3& z, double t,
                      const FlowParams& params, const MultiIndex& alpha,
                      const MultiIndex& beta);

/// (|y - tau t e1 - e^{-t Omega} z|^2 + t)^{-3/2 - order/2}; t = 0 is the
/// one-sided limit.
double majorant(const Vec3& y, const Vec3& z, double t,
                const FlowParams& params, int order);

/// Gamma at one fixed time. Holds e^{-t Omega} so that sums over many
/// (y, z) pairs pay for the rotation once.
class KernelSlice {
 public:
  KernelSlice(double t, const FlowParams& params);
  /// Heat/drift time t with the rotation taken at a separate time `phase`:
  /// Lambda(y - tau t e1 - e^{-phase Omega} z, t) e^{-phase Omega}.
  KernelSlice(double t, double phase, const FlowParams& params);

  double time() const { return t_; }
  const Mat3& rotation() const { return rot_; }
  Vec3 shifted(const Vec3& y, const Vec3& z) const;

  Mat3 gamma(const Vec3& y, const Vec3& z) const;
  Mat3 derivative(const Vec3& y, const Vec3& z, const MultiIndex& alpha,
                  const MultiIndex& beta) const;

  /// Gamma and the three first z-derivatives d_{z_l} Gamma, l = 0..2, with
  /// an optional y-derivative applied to all four (axis < 0 means none).
  void gamma_with_z_gradient(const Vec3& y, const Vec3& z, int y_axis,
                             Mat3& value, std::array<Mat3, 3>& dz) const;

 private:
  double t_;
  double tau_;
  Mat3 rot_;
};

void check_derivative_order(const MultiIndex& alpha, const MultiIndex& beta);

}  // namespace oseen_rotor
