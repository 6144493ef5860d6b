#pragma once

// Far-field expansion of an exterior flow past the body D:
//
//   R(f)(x) + B(x) = sum_k beta_k d^a Z_.k(x, 0) + flux d^a E4(x) + F1(x),
//
// with the boundary functional B, the volume potential R(f) of the force,
// and the nonlinear remainder F2 built from an exterior velocity field.
// Every kernel sum over quadrature nodes is evaluated inside a single time
// integral (time outermost), so kernel differences such as
// Z(x, y) - Z(x, 0) share nodes and cancel exactly.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oseen_rotor/time_quadrature.hpp"

namespace oseen_rotor {

struct MeshNode {
  Vec3 point;
  Vec3 normal;  // outward from the body, unit
  double weight = 0.0;
};

struct BoundaryMesh {
  std::vector<MeshNode> nodes;
  double body_radius = 1.0;

  double area() const;
  /// Radius of the smallest origin-centred ball containing every node.
  double circumradius() const;
  /// Typical node spacing, sqrt of the largest weight.
  double resolution() const;
};

/// Gauss-Legendre in cos(theta) times uniform azimuth on the sphere |y| = R.
BoundaryMesh sphere_mesh(int n_theta = 32, int n_phi = 64, double radius = 1.0);

struct SurfaceData {
  std::vector<Vec3> u_b;
  std::vector<Mat3> gradu_b;  // gradu_b(k, l) = d_l u_k
  std::vector<double> pi_b;

  static SurfaceData zeros(std::size_t n);
  std::size_t size() const { return u_b.size(); }
};

/// Tensor-grid samples of a compactly supported force.
struct ForceSamples {
  std::vector<Vec3> points;
  std::vector<double> weights;
  std::vector<Vec3> values;

  std::size_t size() const { return points.size(); }
  Vec3 total() const;
  /// Centre and radius of a ball containing every sample with f != 0.
  Vec3 support_center() const;
  double support_radius() const;
};

/// Smooth bump (1 - |y-c|^2/r^2)^3 on an n^3 Gauss grid over the cube around
/// B_r(c), scaled so the discrete sum of w f equals `mass`.
ForceSamples bump_force(const Vec3& center, double radius, const Vec3& mass,
                        int n_per_axis = 8);

struct VectorField {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> jacobian;  // (k, l) = d_l u_k
};

/// |u(y)| <= D0 (|y| s_tau(y))^{-1} and |grad u(y)| <= D1 (|y| s_tau(y))^{-3/2}
/// on the exterior of the body (Frobenius norm for the gradient).
struct DecayCertificate {
  double D0 = 0.0;
  double D1 = 0.0;
  double tau = 1.0;

  double value_bound(const Vec3& y) const;
  double gradient_bound(const Vec3& y) const;
  /// Throws DataError naming the point when u or grad u exceeds the bound.
  void check(const Vec3& y, const Vec3& u, const Mat3& grad) const;
};

class ExteriorField {
 public:
  /// Spot-checks the certificate at `spot_checks` random exterior points in
  /// body_radius <= |y| <= 100 body_radius.
  ExteriorField(VectorField field, DecayCertificate certificate,
                double body_radius, std::uint64_t seed = 1,
                int spot_checks = 100);

  Vec3 u(const Vec3& y) const { return field_.value(y); }
  Mat3 grad(const Vec3& y) const { return field_.jacobian(y); }
  const VectorField& field() const { return field_; }
  const DecayCertificate& certificate() const { return certificate_; }
  double body_radius() const { return body_radius_; }
  /// The same field times c (certificate scaled by |c|).
  ExteriorField scaled(double c) const;

 private:
  VectorField field_;
  DecayCertificate certificate_;
  double body_radius_;
};

/// Divergence-free test field outside the unit body:
///   u = swirl curl(g e1) + source grad(1 / |y - c|),  g = (|y| s_tau(y))^{-1/2}.
/// The certificate uses the analytic bound for the swirl part and a sampled
/// supremum (times 1.25) for the rest.
ExteriorField synthetic_field(const FlowParams& params, double swirl = 1.0,
                              double source = 0.2,
                              const Vec3& source_center = Vec3(0.3, 0.2, 0.0),
                              double body_radius = 1.0);

/// Traces of u and grad u on the mesh; pi_b from `pressure` (zero if empty).
SurfaceData surface_trace(const BoundaryMesh& mesh, const VectorField& field,
                          const std::function<double(const Vec3&)>& pressure = {});

struct ExpansionCoeffs {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double flux = 0.0;
  Vec3 beta_linear = Vec3::Zero();     // beta^(I)
  Vec3 beta_nonlinear = Vec3::Zero();  // beta^(II)

  Vec3 beta() const { return {beta1, beta2, beta3}; }
};

/// sigma_k = sum_l (-d_l u_k + delta_kl pi + u_k (tau e1 - omega x y)_l) n_l.
Vec3 boundary_stress(const Vec3& y, const Vec3& n, const Vec3& u,
                     const Mat3& grad, double pi, const FlowParams& params);

/// beta = beta^(I) - tau beta^(II). With include_nonlinear = false the
/// nonlinear part is left out of beta (it is still reported).
ExpansionCoeffs beta_coefficients(const BoundaryMesh& mesh, const SurfaceData& data,
                                  const ForceSamples& force,
                                  const FlowParams& params,
                                  bool include_nonlinear = true,
                                  double support_radius = 2.0);

struct ExpansionValue {
  Vec3 value = Vec3::Zero();
  double error = 0.0;
  int evaluations = 0;
};

/// d^a B(x) split into the Z part (time integral) and the E4 part (closed form).
struct BoundaryParts {
  ExpansionValue kernel;
  Vec3 pressure = Vec3::Zero();
};

BoundaryParts boundary_functional_parts(const Vec3& x, const MultiIndex& alpha,
                                        const BoundaryMesh& mesh,
                                        const SurfaceData& data,
                                        const FlowParams& params,
                                        const QuadSpec& spec = {});

ExpansionValue boundary_functional(const Vec3& x, const MultiIndex& alpha,
                                   const BoundaryMesh& mesh, const SurfaceData& data,
                                   const FlowParams& params,
                                   const QuadSpec& spec = {});

ExpansionValue volume_potential(const Vec3& x, const ForceSamples& force,
                                const FlowParams& params, const QuadSpec& spec = {});

ExpansionValue remainder_I(const Vec3& x, const MultiIndex& alpha,
                           const BoundaryMesh& mesh, const SurfaceData& data,
                           const ForceSamples& force, const FlowParams& params,
                           const QuadSpec& spec = {});

ExpansionValue leading_term(const Vec3& x, const MultiIndex& alpha,
                            const ExpansionCoeffs& coeffs, const FlowParams& params,
                            const QuadSpec& spec = {});

/// Volume grid of the nonlinear remainder: shells about the origin, graded
/// towards the body, the wake axis and |x|, plus a ball B_delta(x) in
/// x-centred coordinates glued in by a smooth partition of unity.
struct VolumeOptions {
  double S1 = 2.0;
  double S = 4.0;
  double radial_ratio = 1.6;
  int radial_order = 5;
  int polar_order = 5;
  int azimuth = 16;
  int local_radial_order = 6;
  int local_polar_order = 8;
  int local_azimuth = 16;
};

struct VolumeNode {
  Vec3 y;
  double weight = 0.0;
};

/// delta = min(1, (S - S1)/2, (|x| - body_radius)/2).
double exclusion_radius(const Vec3& x, double body_radius, const VolumeOptions& opt);

/// Nodes for int_{B_T \ D}; `coarse` lowers every order for the error estimate.
std::vector<VolumeNode> volume_nodes(const Vec3& x, double body_radius,
                                     double truncation_radius,
                                     const FlowParams& params,
                                     const VolumeOptions& opt, bool coarse);

/// sup over (w, t) of |d^a Lambda(w, t)|_F (|w|^2 + t)^{3/2 + |a|/2}, |a| <= 1.
double lambda_majorant_constant(int order);

/// Upper bound for |int_{|y| > T} d^a Z(x, y) (u.grad)u dy| from the
/// certificate, valid for T >= 4|x|.
double remainder_tail_bound(const Vec3& x, const MultiIndex& alpha,
                            const DecayCertificate& cert, double truncation_radius,
                            const FlowParams& params);

/// d^a F2(x) = int_{B_T \ D} d^a Z(x, y) q(y) dy + d^a Z(x, 0) sum (n.u) u w,
/// q = (u.grad)u, n the body normal. The error adds the time-quadrature
/// estimate, |fine - coarse| grid difference and the tail bound beyond T.
/// truncation_radius <= 0 selects T = max(16|x|, 160); any T >= 4|x| is
/// accepted.
ExpansionValue remainder_II(const Vec3& x, const MultiIndex& alpha,
                            const ExteriorField& field, const BoundaryMesh& mesh,
                            const FlowParams& params, const QuadSpec& spec = {},
                            double truncation_radius = 0.0,
                            const VolumeOptions& opt = {});

/// |sum_l (u_l d_l u)(A z) - sum_l (A grad_z)_l [(u_l u)(A z)]|, A = e^{t Omega}.
double rotation_divergence_identity_check(const VectorField& u, double t,
                                          const Vec3& z, const FlowParams& params);

}  // namespace oseen_rotor
