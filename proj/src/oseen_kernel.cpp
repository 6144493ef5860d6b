#include "oseen_rotor/oseen_kernel.hpp"

#include <cmath>
#include <string>

#include "oseen_rotor/scalar_kernels.hpp"

namespace oseen_rotor {

FlowParams::FlowParams(double tau, double rho) : tau_(tau), rho_(rho) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("Reynolds number tau must be positive");
  }
  if (rho == 0.0 || !std::isfinite(rho)) {
    throw DomainError("Taylor number rho must be nonzero");
  }
}

MultiIndex::MultiIndex(int a1, int a2, int a3) : a{a1, a2, a3} {
  if (a1 < 0 || a2 < 0 || a3 < 0) {
    throw DomainError("multi-index entries must be nonnegative");
  }
}

MultiIndex MultiIndex::unit(int axis) {
  MultiIndex m;
  m.a.at(static_cast<std::size_t>(axis)) = 1;
  return m;
}

void check_derivative_order(const MultiIndex& alpha, const MultiIndex& beta) {
  const int n = alpha.order() + beta.order();
  if (n > kMaxDerivativeOrder) {
    throw UnsupportedOrderError("derivative order |alpha+beta| = " +
                                std::to_string(n) + " exceeds 2");
  }
}

Mat3 omega_matrix(const FlowParams& params) {
  const Vec3 w = params.omega();
  Mat3 m;
  m << 0.0, -w[2], w[1],  //
      w[2], 0.0, -w[0],   //
      -w[1], w[0], 0.0;
  return m;
}

Mat3 rotation(double t, const FlowParams& params, int sign) {
  const double angle = (sign >= 0 ? 1.0 : -1.0) * params.rho() * t;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << 1.0, 0.0, 0.0,  //
      0.0, c, -s,      //
      0.0, s, c;
  return r;
}

Vec3 shifted_argument(const Vec3& y, const Vec3& z, double t,
                      const FlowParams& params) {
  return y - params.tau() * t * kE1 - rotation(t, params, -1) * z;
}

KernelPoint make_kernel_point(const Vec3& y, const Vec3& z, double t,
                              const FlowParams& params) {
  return KernelPoint{y, z, t, shifted_argument(y, z, t, params)};
}

KernelSlice::KernelSlice(double t, const FlowParams& params)
    : KernelSlice(t, t, params) {}

KernelSlice::KernelSlice(double t, double phase, const FlowParams& params)
    : t_(t), tau_(params.tau()), rot_(oseen_rotor::rotation(phase, params, -1)) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("time must be positive and finite");
  }
}

Vec3 KernelSlice::shifted(const Vec3& y, const Vec3& z) const {
  Vec3 w = y - rot_ * z;
  w[0] -= tau_ * t_;
  return w;
}

Mat3 KernelSlice::gamma(const Vec3& y, const Vec3& z) const {
  return LambdaJet(shifted(y, z), t_).value() * rot_;
}

Mat3 KernelSlice::derivative(const Vec3& y, const Vec3& z,
                             const MultiIndex& alpha,
                             const MultiIndex& beta) const {
  check_derivative_order(alpha, beta);
  // Each y-index differentiates Lambda along e_m, each z-index along
  // -e^{-t Omega} e_l (chain rule through the shifted argument).
  std::array<Vec3, kMaxDerivativeOrder> dirs;
  int n = 0;
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < alpha.a[static_cast<std::size_t>(m)]; ++k) {
      dirs[static_cast<std::size_t>(n++)] = Vec3::Unit(m);
    }
  }
  for (int l = 0; l < 3; ++l) {
    for (int k = 0; k < beta.a[static_cast<std::size_t>(l)]; ++k) {
      dirs[static_cast<std::size_t>(n++)] = -rot_.col(l);
    }
  }
  const LambdaJet jet(shifted(y, z), t_);
  switch (n) {
    case 0:
      return jet.value() * rot_;
    case 1:
      return jet.d1(dirs[0]) * rot_;
    default:
      return jet.d2(dirs[0], dirs[1]) * rot_;
  }
}

void KernelSlice::gamma_with_z_gradient(const Vec3& y, const Vec3& z,
                                        int y_axis, Mat3& value,
                                        std::array<Mat3, 3>& dz) const {
  const LambdaJet jet(shifted(y, z), t_);
  if (y_axis < 0) {
    value = jet.value() * rot_;
    for (int l = 0; l < 3; ++l) {
      dz[static_cast<std::size_t>(l)] = jet.d1(-rot_.col(l)) * rot_;
    }
    return;
  }
  const Vec3 e = Vec3::Unit(y_axis);
  value = jet.d1(e) * rot_;
  for (int l = 0; l < 3; ++l) {
    dz[static_cast<std::size_t>(l)] = jet.d2(e, -rot_.col(l)) * rot_;
  }
}

Mat3 gamma_kernel(const Vec3& y, const Vec3& z, double t,
                  const FlowParams& params) {
  return KernelSlice(t, params).gamma(y, z);
}

Mat3 gamma_derivative(const Vec3& y, const Vec3& z, double t,
                      const FlowParams& params, const MultiIndex& alpha,
                      const MultiIndex& beta) {
  check_derivative_order(alpha, beta);
  return KernelSlice(t, params).derivative(y, z, alpha, beta);
}

double majorant(const Vec3& y, const Vec3& z, double t,
                const FlowParams& params, int order) {
  if (t < 0.0) throw DomainError("majorant needs t >= 0");
  if (order < 0 || order > kMaxDerivativeOrder) {
    throw UnsupportedOrderError("majorant order must be 0..2");
  }
  const double phi = shifted_argument(y, z, t, params).squaredNorm() + t;
  return std::pow(phi, -1.5 - 0.5 * order);
}

}  // namespace oseen_rotor
