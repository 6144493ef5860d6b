#include "oseen_rotor/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "oseen_rotor/quadrature.hpp"
#include "oseen_rotor/rng.hpp"
#include "oseen_rotor/scalar_kernels.hpp"
#include "oseen_rotor/wake_geometry.hpp"

namespace oseen_rotor {

namespace {

constexpr double kPi = std::numbers::pi;

// Consecutive forced breaks closer than this ratio are merged; thousands of
// source nodes otherwise produce one panel per node.
constexpr double kBreakRatio = 1.25;

int derivative_axis(const MultiIndex& alpha) {
  switch (alpha.order()) {
    case 0:
      return -1;
    case 1:
      for (int m = 0; m < 3; ++m) {
        if (alpha.a[static_cast<std::size_t>(m)] == 1) return m;
      }
      break;
    default:
      break;
  }
  throw UnsupportedOrderError("expansion terms need |alpha| <= 1");
}

Vec3 pressure_derivative(const Vec3& x, int axis) {
  return axis < 0 ? pressure_kernel(x) : Vec3(pressure_kernel_gradient(x).col(axis));
}

// One source of a fused kernel sum: d^a Z(x, y) a + sum_l n_l d_{y_l} Z(x, y) b
// (the second part only when `gradient`), accumulated into column `channel`
// or into every column when channel < 0.
struct SourceNode {
  Vec3 y;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 n = Vec3::Zero();
  int channel = -1;
  bool gradient = false;
};

template <int C>
using Block = Eigen::Matrix<double, 3, C>;

template <int C>
TimeIntegral<Block<C>> fused_sum(const Vec3& x, int axis,
                                 const std::vector<SourceNode>& nodes,
                                 const FlowParams& params, const QuadSpec& spec,
                                 const char* what) {
  TimeIntegral<Block<C>> out;
  out.value = Block<C>::Zero();
  out.converged = true;
  if (nodes.empty()) return out;

  std::vector<std::pair<Vec3, Vec3>> pairs;
  pairs.reserve(nodes.size());
  for (const auto& node : nodes) pairs.emplace_back(x, node.y);
  TimeFeatures features = feature_times(pairs, params);
  std::vector<double> kept;
  for (double t : features.breaks) {
    if (kept.empty() || t > kBreakRatio * kept.back()) kept.push_back(t);
  }
  features.breaks = std::move(kept);

  const MultiIndex none;
  const MultiIndex alpha = axis < 0 ? none : MultiIndex::unit(axis);
  auto f = [&](double t, double phase) -> Block<C> {
    const KernelSlice slice(t, phase, params);
    Block<C> acc = Block<C>::Zero();
    Mat3 value;
    std::array<Mat3, 3> dz;
    for (const auto& node : nodes) {
      Vec3 v;
      if (node.gradient) {
        slice.gamma_with_z_gradient(x, node.y, axis, value, dz);
        v = value * node.a +
            (node.n[0] * dz[0] + node.n[1] * dz[1] + node.n[2] * dz[2]) * node.b;
      } else {
        value = axis < 0 ? slice.gamma(x, node.y)
                         : slice.derivative(x, node.y, alpha, none);
        v = value * node.a;
      }
      if (node.channel < 0) {
        acc.colwise() += v;
      } else {
        acc.col(node.channel) += v;
      }
    }
    return acc;
  };
  out = integrate_time<Block<C>>(f, features, spec, params);
  if (!out.converged) {
    Mat3 best = Mat3::Zero();
    best.col(0) = out.value.col(0);
    throw AccuracyError(std::string(what) +
                            ": time quadrature did not converge within "
                            "max_subdivisions",
                        best, out.error);
  }
  return out;
}

ExpansionValue single_channel(const Vec3& x, int axis,
                              const std::vector<SourceNode>& nodes,
                              const FlowParams& params, const QuadSpec& spec,
                              const char* what) {
  const auto r = fused_sum<1>(x, axis, nodes, params, spec, what);
  return ExpansionValue{r.value.col(0), r.error, r.evaluations};
}

void check_data(const BoundaryMesh& mesh, const SurfaceData& data) {
  const std::size_t n = mesh.nodes.size();
  if (data.u_b.size() != n || data.gradu_b.size() != n || data.pi_b.size() != n) {
    std::ostringstream msg;
    msg << "surface data size (" << data.u_b.size() << ", " << data.gradu_b.size()
        << ", " << data.pi_b.size() << ") does not match mesh size " << n;
    throw DataError(msg.str());
  }
}

void check_force(const ForceSamples& force) {
  if (force.weights.size() != force.points.size() ||
      force.values.size() != force.points.size()) {
    throw DataError("force samples: points, weights and values differ in length");
  }
}

void check_exterior(const Vec3& x, const BoundaryMesh& mesh) {
  const double d = x.norm() - mesh.circumradius();
  if (!(d > 0.0)) {
    throw PreconditionError("x must lie outside the body's circumscribing ball");
  }
  const double h = mesh.resolution();
  if (d < 4.0 * h) {
    std::ostringstream msg;
    msg << "x too close to the surface: distance " << d << " < 4 x mesh resolution "
        << h;
    throw AccuracyError(msg.str(), Mat3::Zero(),
                        std::numeric_limits<double>::infinity());
  }
}

void check_outside_force(const Vec3& x, const ForceSamples& force) {
  if (force.size() == 0) return;
  if ((x - force.support_center()).norm() <= force.support_radius()) {
    throw PreconditionError("unsupported: x inside the force support");
  }
}

void append_force(std::vector<SourceNode>& nodes, const ForceSamples& force,
                  Vec3& total) {
  for (std::size_t i = 0; i < force.size(); ++i) {
    const Vec3 a = force.weights[i] * force.values[i];
    total += a;
    if (a.isZero(0.0)) continue;
    SourceNode node;
    node.y = force.points[i];
    node.a = a;
    nodes.push_back(node);
  }
}

// Z sigma + sum_l n_l d_{y_l} Z u over the mesh; returns sum w sigma.
Vec3 append_boundary(std::vector<SourceNode>& nodes, const BoundaryMesh& mesh,
                     const SurfaceData& data, const FlowParams& params) {
  Vec3 total = Vec3::Zero();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const MeshNode& m = mesh.nodes[i];
    const Vec3 sigma = boundary_stress(m.point, m.normal, data.u_b[i],
                                       data.gradu_b[i], data.pi_b[i], params);
    SourceNode node;
    node.y = m.point;
    node.a = m.weight * sigma;
    node.b = m.weight * data.u_b[i];
    node.n = m.normal;
    node.gradient = !node.b.isZero(0.0);
    total += node.a;
    if (node.a.isZero(0.0) && !node.gradient) continue;
    nodes.push_back(node);
  }
  return total;
}

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// Partition of unity: 1 on B_{delta/2}(x), 0 outside B_delta(x).
double local_weight(double r, double delta) {
  return 1.0 - smooth_step((r - 0.5 * delta) / (0.5 * delta));
}

void sort_unique(std::vector<double>& v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double b : v) {
    if (out.empty() || b - out.back() > tol) out.push_back(b);
  }
  v = std::move(out);
}

double v_of_theta(double theta) {
  return 1.0 - std::cos(std::clamp(theta, 0.0, kPi));
}

}  // namespace

// ---------------------------------------------------------------------------
// Mesh, data, force.

double BoundaryMesh::area() const {
  double a = 0.0;
  for (const auto& n : nodes) a += n.weight;
  return a;
}

double BoundaryMesh::circumradius() const {
  double r = 0.0;
  for (const auto& n : nodes) r = std::max(r, n.point.norm());
  return r;
}

double BoundaryMesh::resolution() const {
  double w = 0.0;
  for (const auto& n : nodes) w = std::max(w, n.weight);
  return std::sqrt(w);
}

BoundaryMesh sphere_mesh(int n_theta, int n_phi, double radius) {
  if (n_theta < 2 || n_phi < 3) throw DomainError("sphere mesh needs n_theta >= 2, n_phi >= 3");
  if (!(radius > 0.0)) throw DomainError("sphere mesh radius must be positive");
  BoundaryMesh mesh;
  mesh.body_radius = radius;
  const GaussRule mu = gauss_legendre(n_theta);
  const double dphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double c = mu.nodes[static_cast<std::size_t>(i)];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * dphi;
      const Vec3 n(c, s * std::cos(phi), s * std::sin(phi));
      mesh.nodes.push_back(
          MeshNode{radius * n, n, mu.weights[static_cast<std::size_t>(i)] * dphi * radius * radius});
    }
  }
  return mesh;
}

SurfaceData SurfaceData::zeros(std::size_t n) {
  SurfaceData d;
  d.u_b.assign(n, Vec3::Zero());
  d.gradu_b.assign(n, Mat3::Zero());
  d.pi_b.assign(n, 0.0);
  return d;
}

Vec3 ForceSamples::total() const {
  Vec3 t = Vec3::Zero();
  for (std::size_t i = 0; i < size(); ++i) t += weights[i] * values[i];
  return t;
}

Vec3 ForceSamples::support_center() const {
  Vec3 c = Vec3::Zero();
  int n = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (values[i].isZero(0.0)) continue;
    c += points[i];
    ++n;
  }
  return n > 0 ? Vec3(c / n) : Vec3::Zero();
}

double ForceSamples::support_radius() const {
  const Vec3 c = support_center();
  double r = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!values[i].isZero(0.0)) r = std::max(r, (points[i] - c).norm());
  }
  return r;
}

ForceSamples bump_force(const Vec3& center, double radius, const Vec3& mass,
                        int n_per_axis) {
  if (!(radius > 0.0)) throw DomainError("bump radius must be positive");
  if (n_per_axis < 2) throw DomainError("bump grid needs n_per_axis >= 2");
  std::array<GaussRule, 3> rules;
  for (int d = 0; d < 3; ++d) {
    rules[static_cast<std::size_t>(d)] =
        gauss_legendre(n_per_axis, center[d] - radius, center[d] + radius);
  }
  ForceSamples out;
  std::vector<double> profile;
  double m0 = 0.0;
  const auto n = static_cast<std::size_t>(n_per_axis);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const Vec3 y(rules[0].nodes[i], rules[1].nodes[j], rules[2].nodes[k]);
        const double s2 = (y - center).squaredNorm() / (radius * radius);
        if (s2 >= 1.0) continue;
        const double p = std::pow(1.0 - s2, 3);
        const double w = rules[0].weights[i] * rules[1].weights[j] * rules[2].weights[k];
        out.points.push_back(y);
        out.weights.push_back(w);
        profile.push_back(p);
        m0 += w * p;
      }
    }
  }
  for (double p : profile) out.values.push_back(mass * (p / m0));
  return out;
}

// ---------------------------------------------------------------------------
// Exterior fields.

double DecayCertificate::value_bound(const Vec3& y) const {
  return D0 / (y.norm() * s_tau(y, tau));
}

double DecayCertificate::gradient_bound(const Vec3& y) const {
  return D1 * std::pow(y.norm() * s_tau(y, tau), -1.5);
}

void DecayCertificate::check(const Vec3& y, const Vec3& u, const Mat3& grad) const {
  constexpr double kSlack = 1.0 + 1e-9;
  const double bu = value_bound(y);
  const double bg = gradient_bound(y);
  if (!(u.norm() <= kSlack * bu) || !(grad.norm() <= kSlack * bg)) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "decay certificate violated at y = (" << y[0] << ", " << y[1] << ", "
        << y[2] << "): |u| = " << u.norm() << " (bound " << bu
        << "), |grad u| = " << grad.norm() << " (bound " << bg << ")";
    throw DataError(msg.str());
  }
}

ExteriorField::ExteriorField(VectorField field, DecayCertificate certificate,
                             double body_radius, std::uint64_t seed,
                             int spot_checks)
    : field_(std::move(field)),
      certificate_(certificate),
      body_radius_(body_radius) {
  if (!field_.value || !field_.jacobian) {
    throw DataError("exterior field needs both u and grad u");
  }
  if (!(body_radius > 0.0)) throw DomainError("body radius must be positive");
  if (!(certificate.D0 >= 0.0) || !(certificate.D1 >= 0.0)) {
    throw DataError("decay certificate constants must be nonnegative");
  }
  const CounterRng rng(seed, 0x5eedf1e1dULL);
  const double span = std::log(100.0);
  for (int i = 0; i < spot_checks; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const double r = body_radius * std::exp(span * rng.uniform(4 * k));
    const Vec3 y = r * rng.unit_vector(2 * k + 1);
    certificate_.check(y, field_.value(y), field_.jacobian(y));
  }
}

ExteriorField ExteriorField::scaled(double c) const {
  const VectorField base = field_;
  VectorField f{[base, c](const Vec3& y) -> Vec3 { return c * base.value(y); },
                [base, c](const Vec3& y) -> Mat3 { return c * base.jacobian(y); }};
  DecayCertificate cert = certificate_;
  cert.D0 *= std::abs(c);
  cert.D1 *= std::abs(c);
  return ExteriorField(std::move(f), cert, body_radius_, 1, 0);
}

namespace {

struct SyntheticParts {
  double tau;
  double swirl;
  double source;
  Vec3 center;

  void eval(const Vec3& y, Vec3& u, Mat3& grad) const {
    const double r = y.norm();
    const Vec3 yh = y / r;
    const double s = 1.0 + tau * (r - y[0]);
    const double P = r * s;
    const Vec3 ds = tau * (yh - kE1);
    const Vec3 dP = s * yh + r * ds;
    const Mat3 d2r = (Mat3::Identity() - yh * yh.transpose()) / r;
    const Mat3 d2P = yh * ds.transpose() + ds * yh.transpose() + s * d2r + r * tau * d2r;
    const Vec3 dg = -0.5 * std::pow(P, -1.5) * dP;
    const Mat3 H = 0.75 * std::pow(P, -2.5) * (dP * dP.transpose()) -
                   0.5 * std::pow(P, -1.5) * d2P;
    u = swirl * Vec3(0.0, dg[2], -dg[1]);
    grad.setZero();
    grad.row(1) = swirl * H.row(2);
    grad.row(2) = -swirl * H.row(1);

    const Vec3 d = y - center;
    const double dn = d.norm();
    const double d3 = dn * dn * dn;
    u += -source * d / d3;
    grad += -source * (Mat3::Identity() / d3 - 3.0 * (d * d.transpose()) / (d3 * dn * dn));
  }
};

}  // namespace

ExteriorField synthetic_field(const FlowParams& params, double swirl, double source,
                              const Vec3& source_center, double body_radius) {
  if (!(source_center.norm() < body_radius)) {
    throw DomainError("synthetic field: the source must sit inside the body");
  }
  const double tau = params.tau();
  const SyntheticParts parts{tau, swirl, source, source_center};
  VectorField field{[parts](const Vec3& y) -> Vec3 {
                      Vec3 u;
                      Mat3 g;
                      parts.eval(y, u, g);
                      return u;
                    },
                    [parts](const Vec3& y) -> Mat3 {
                      Vec3 u;
                      Mat3 g;
                      parts.eval(y, u, g);
                      return g;
                    }};

  // |curl(g e1)| <= |grad g| <= (1/2)(sqrt(1 + 2 tau) + sqrt(2 tau)) / P for
  // |y| >= 1; the source term and the gradient are bounded by sampling.
  double src_sup = 0.0;
  double grad_sup = 0.0;
  const auto radii = geometric_radii(body_radius, 1e4 * body_radius, 60);
  for (double r : radii) {
    for (int iv = 0; iv <= 40; ++iv) {
      const double v = iv == 40 ? 2.0 : 2e-9 * std::pow(1e9, iv / 40.0);
      const double mu = 1.0 - v;
      const double sn = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      for (int ip = 0; ip < 8; ++ip) {
        const double phi = 2.0 * kPi * ip / 8.0;
        const Vec3 y = r * Vec3(mu, sn * std::cos(phi), sn * std::sin(phi));
        const double P = r * s_tau(y, tau);
        src_sup = std::max(src_sup, P / (y - source_center).squaredNorm());
        Vec3 u;
        Mat3 g;
        parts.eval(y, u, g);
        grad_sup = std::max(grad_sup, g.norm() * std::pow(P, 1.5));
      }
    }
  }
  DecayCertificate cert;
  cert.tau = tau;
  cert.D0 = std::abs(swirl) * 0.5 * (std::sqrt(1.0 + 2.0 * tau) + std::sqrt(2.0 * tau)) *
                std::max(1.0, 1.0 / std::sqrt(body_radius)) +
            1.25 * std::abs(source) * src_sup;
  cert.D1 = 1.25 * grad_sup;
  return ExteriorField(std::move(field), cert, body_radius);
}

SurfaceData surface_trace(const BoundaryMesh& mesh, const VectorField& field,
                          const std::function<double(const Vec3&)>& pressure) {
  SurfaceData d;
  for (const auto& n : mesh.nodes) {
    d.u_b.push_back(field.value(n.point));
    d.gradu_b.push_back(field.jacobian(n.point));
    d.pi_b.push_back(pressure ? pressure(n.point) : 0.0);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Coefficients and linear terms.

Vec3 boundary_stress(const Vec3& y, const Vec3& n, const Vec3& u, const Mat3& grad,
                     double pi, const FlowParams& params) {
  const Vec3 drift = params.tau() * kE1 - params.omega().cross(y);
  return -grad * n + pi * n + u * drift.dot(n);
}

ExpansionCoeffs beta_coefficients(const BoundaryMesh& mesh, const SurfaceData& data,
                                  const ForceSamples& force, const FlowParams& params,
                                  bool include_nonlinear, double support_radius) {
  check_data(mesh, data);
  check_force(force);
  for (std::size_t i = 0; i < force.size(); ++i) {
    if (!force.values[i].isZero(0.0) && force.points[i].norm() > support_radius) {
      throw PreconditionError("force sample outside B_{S1}");
    }
  }
  if (mesh.circumradius() > support_radius) {
    throw PreconditionError("mesh extends outside B_{S1}");
  }
  ExpansionCoeffs c;
  c.beta_linear = force.total();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const MeshNode& m = mesh.nodes[i];
    const Vec3& u = data.u_b[i];
    c.beta_linear += m.weight * boundary_stress(m.point, m.normal, u, data.gradu_b[i],
                                                data.pi_b[i], params);
    // Normal pointing into the fluid.
    c.beta_nonlinear -= m.weight * m.normal.dot(u) * u;
    c.flux += m.weight * u.dot(m.normal);
  }
  Vec3 beta = c.beta_linear;
  if (include_nonlinear) beta -= params.tau() * c.beta_nonlinear;
  c.beta1 = beta[0];
  c.beta2 = beta[1];
  c.beta3 = beta[2];
  return c;
}

BoundaryParts boundary_functional_parts(const Vec3& x, const MultiIndex& alpha,
                                        const BoundaryMesh& mesh,
                                        const SurfaceData& data,
                                        const FlowParams& params,
                                        const QuadSpec& spec) {
  const int axis = derivative_axis(alpha);
  check_data(mesh, data);
  check_exterior(x, mesh);
  std::vector<SourceNode> nodes;
  append_boundary(nodes, mesh, data, params);
  BoundaryParts out;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const MeshNode& m = mesh.nodes[i];
    const double un = data.u_b[i].dot(m.normal);
    if (un != 0.0) out.pressure += m.weight * un * pressure_derivative(x - m.point, axis);
  }
  out.kernel = single_channel(x, axis, nodes, params, spec, "boundary_functional");
  return out;
}

ExpansionValue boundary_functional(const Vec3& x, const MultiIndex& alpha,
                                   const BoundaryMesh& mesh, const SurfaceData& data,
                                   const FlowParams& params, const QuadSpec& spec) {
  const BoundaryParts p = boundary_functional_parts(x, alpha, mesh, data, params, spec);
  ExpansionValue v = p.kernel;
  v.value += p.pressure;
  return v;
}

ExpansionValue volume_potential(const Vec3& x, const ForceSamples& force,
                                const FlowParams& params, const QuadSpec& spec) {
  check_force(force);
  check_outside_force(x, force);
  std::vector<SourceNode> nodes;
  Vec3 total = Vec3::Zero();
  append_force(nodes, force, total);
  return single_channel(x, -1, nodes, params, spec, "volume_potential");
}

ExpansionValue remainder_I(const Vec3& x, const MultiIndex& alpha,
                           const BoundaryMesh& mesh, const SurfaceData& data,
                           const ForceSamples& force, const FlowParams& params,
                           const QuadSpec& spec) {
  const int axis = derivative_axis(alpha);
  check_data(mesh, data);
  check_force(force);
  check_exterior(x, mesh);
  check_outside_force(x, force);

  std::vector<SourceNode> nodes;
  Vec3 total = Vec3::Zero();
  append_force(nodes, force, total);
  total += append_boundary(nodes, mesh, data, params);
  if (!total.isZero(0.0)) {
    SourceNode origin;
    origin.y = Vec3::Zero();
    origin.a = -total;
    nodes.push_back(origin);
  }
  ExpansionValue v = single_channel(x, axis, nodes, params, spec, "remainder_I");
  const Vec3 e0 = pressure_derivative(x, axis);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const MeshNode& m = mesh.nodes[i];
    const double un = data.u_b[i].dot(m.normal);
    if (un != 0.0) {
      v.value += m.weight * un * (pressure_derivative(x - m.point, axis) - e0);
    }
  }
  return v;
}

ExpansionValue leading_term(const Vec3& x, const MultiIndex& alpha,
                            const ExpansionCoeffs& coeffs, const FlowParams& params,
                            const QuadSpec& spec) {
  const int axis = derivative_axis(alpha);
  if (x.isZero(0.0)) throw SingularPointError("singular: x=0");
  ExpansionValue v;
  const Vec3 beta = coeffs.beta();
  if (!beta.isZero(0.0)) {
    const ZValue z = z_derivative(x, Vec3::Zero(), params, alpha, MultiIndex{}, spec);
    v.value = z.value * beta;
    v.error = z.error_estimate * beta.lpNorm<1>();
    v.evaluations = z.evaluations;
  }
  v.value += coeffs.flux * pressure_derivative(x, axis);
  return v;
}

// ---------------------------------------------------------------------------
// Nonlinear remainder.

double exclusion_radius(const Vec3& x, double body_radius, const VolumeOptions& opt) {
  return std::min({1.0, 0.5 * (opt.S - opt.S1), 0.5 * (x.norm() - body_radius)});
}

std::vector<VolumeNode> volume_nodes(const Vec3& x, double body_radius,
                                     double truncation_radius,
                                     const FlowParams& params,
                                     const VolumeOptions& opt, bool coarse) {
  const double xr = x.norm();
  const double delta = exclusion_radius(x, body_radius, opt);
  if (!(delta > 0.0)) throw PreconditionError("x must lie outside the body");
  const double T = truncation_radius;
  if (!(T > xr + delta)) throw PreconditionError("truncation radius must exceed |x| + delta");
  const double tau = params.tau();
  const int lower = coarse ? 1 : 0;
  const int n_rad = opt.radial_order - lower;
  const int n_pol = opt.polar_order - lower;
  const int n_az = coarse ? (3 * opt.azimuth) / 4 : opt.azimuth;
  const int n_lrad = opt.local_radial_order - 2 * lower;
  const int n_lpol = opt.local_polar_order - 2 * lower;
  const int n_laz = coarse ? (3 * opt.local_azimuth) / 4 : opt.local_azimuth;
  if (std::min({n_rad, n_pol, n_az, n_lrad, n_lpol, n_laz}) < 2 || !(opt.radial_ratio > 1.0)) {
    throw DomainError("volume grid orders too small");
  }

  const double theta_x = std::acos(std::clamp(x[0] / xr, -1.0, 1.0));
  const double perp = std::hypot(x[1], x[2]);
  const bool on_axis = perp <= 1e-12 * xr;
  const double phi_x = on_axis ? 0.0 : std::atan2(x[2], x[1]);

  std::vector<double> rb;
  for (double r = body_radius; r < T; r *= opt.radial_ratio) rb.push_back(r);
  rb.push_back(T);
  for (double k : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
    const double r = xr + k * delta;
    if (r > body_radius && r < T) rb.push_back(r);
  }
  sort_unique(rb, 1e-9 * T);

  // Azimuth: trapezoid for x on the axis, Gauss panels graded towards phi_x
  // otherwise.
  std::vector<double> az_nodes;
  std::vector<double> az_weights;
  if (on_axis) {
    for (int j = 0; j < n_az; ++j) {
      az_nodes.push_back(2.0 * kPi * (j + 0.5) / n_az);
      az_weights.push_back(2.0 * kPi / n_az);
    }
  } else {
    std::vector<double> pb{-kPi, kPi};
    for (double d = std::min(delta / perp, 0.5); d < kPi; d *= 2.0) {
      pb.push_back(-d);
      pb.push_back(d);
    }
    sort_unique(pb, 1e-12);
    for (std::size_t p = 0; p + 1 < pb.size(); ++p) {
      const GaussRule g = gauss_legendre(n_pol, pb[p], pb[p + 1]);
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        az_nodes.push_back(phi_x + g.nodes[q]);
        az_weights.push_back(g.weights[q]);
      }
    }
  }

  std::vector<VolumeNode> out;
  for (std::size_t i = 0; i + 1 < rb.size(); ++i) {
    const double ra = rb[i];
    const double rbnd = rb[i + 1];
    // Polar variable v = 1 - cos(theta), graded towards the downstream axis.
    std::vector<double> vb{0.0, 2.0};
    const double v_min = std::min(1.0 / (8.0 * tau * rbnd), delta * delta / (8.0 * rbnd * rbnd));
    for (double v = v_min; v < 2.0; v *= 4.0) vb.push_back(v);
    if (ra < xr + 2.0 * delta && rbnd > xr - 2.0 * delta) {
      for (double k : {-2.0, -1.0, 1.0, 2.0}) vb.push_back(v_of_theta(theta_x + k * delta / xr));
    }
    if (!on_axis) {
      // The wake of Z(x, .) wraps the cylinder |y_perp| = |x_perp| upstream of x.
      const double rm = 0.5 * (ra + rbnd);
      if (rm > perp) {
        const double tc = kPi - std::asin(perp / rm);
        if (rm * std::cos(tc) < x[0]) {
          for (double k : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            vb.push_back(v_of_theta(tc + k * std::max(delta, 1.0) / rm));
          }
        }
      }
    }
    sort_unique(vb, 1e-15);
    const GaussRule gr = gauss_legendre(n_rad, ra, rbnd);
    for (std::size_t a = 0; a < gr.nodes.size(); ++a) {
      const double rho = gr.nodes[a];
      const double wr = gr.weights[a] * rho * rho;
      for (std::size_t p = 0; p + 1 < vb.size(); ++p) {
        const GaussRule gv = gauss_legendre(n_pol, vb[p], vb[p + 1]);
        for (std::size_t b = 0; b < gv.nodes.size(); ++b) {
          const double v = gv.nodes[b];
          const double mu = 1.0 - v;
          const double sn = std::sqrt(std::max(0.0, v * (2.0 - v)));
          for (std::size_t c = 0; c < az_nodes.size(); ++c) {
            const Vec3 y = rho * Vec3(mu, sn * std::cos(az_nodes[c]), sn * std::sin(az_nodes[c]));
            const double w = wr * gv.weights[b] * az_weights[c] *
                             (1.0 - local_weight((y - x).norm(), delta));
            if (w > 0.0) out.push_back(VolumeNode{y, w});
          }
        }
      }
    }
  }

  // Ball B_delta(x) in x-centred coordinates.
  const GaussRule lmu = gauss_legendre(n_lpol);
  for (const auto& [a, b] : {std::pair{0.0, 0.5 * delta}, std::pair{0.5 * delta, delta}}) {
    const GaussRule gr = gauss_legendre(n_lrad, a, b);
    for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
      const double r = gr.nodes[i];
      const double wr = gr.weights[i] * r * r * local_weight(r, delta);
      for (std::size_t j = 0; j < lmu.nodes.size(); ++j) {
        const double mu = lmu.nodes[j];
        const double sn = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int k = 0; k < n_laz; ++k) {
          const double phi = 2.0 * kPi * (k + 0.5) / n_laz;
          const Vec3 y = x + r * Vec3(mu, sn * std::cos(phi), sn * std::sin(phi));
          const double w = wr * lmu.weights[j] * 2.0 * kPi / n_laz;
          if (w > 0.0) out.push_back(VolumeNode{y, w});
        }
      }
    }
  }
  return out;
}

double lambda_majorant_constant(int order) {
  if (order < 0 || order > 1) throw UnsupportedOrderError("majorant constant needs order 0 or 1");
  // Lambda(w, t) = t^{-3/2} F(w / sqrt(t)) and the Frobenius norm is
  // rotation invariant, so a scan over |w| at t = 1 (and the angle between w
  // and the derivative direction) covers every (w, t).
  static const std::array<double, 2> constants = [] {
    std::array<double, 2> c{0.0, 0.0};
    constexpr int kRadii = 801;
    for (int i = 0; i < kRadii; ++i) {
      const double r = 1e-4 * std::pow(1e8, static_cast<double>(i) / (kRadii - 1));
      const Vec3 w = r * kE1;
      const LambdaJet jet(w, 1.0);
      c[0] = std::max(c[0], jet.value().norm() * std::pow(r * r + 1.0, 1.5));
      for (int k = 0; k <= 16; ++k) {
        const double th = 0.5 * kPi * k / 16.0;
        const Vec3 v(std::cos(th), std::sin(th), 0.0);
        c[1] = std::max(c[1], jet.d1(v).norm() * std::pow(r * r + 1.0, 2.0));
      }
    }
    c[0] *= 1.1;
    c[1] *= 1.1;
    return c;
  }();
  return constants[static_cast<std::size_t>(order)];
}

double remainder_tail_bound(const Vec3& x, const MultiIndex& alpha,
                            const DecayCertificate& cert, double truncation_radius,
                            const FlowParams& params) {
  const int order = alpha.order();
  if (order > 1) throw UnsupportedOrderError("tail bound needs |alpha| <= 1");
  const double T = truncation_radius;
  if (T < 4.0 * x.norm()) throw PreconditionError("truncation radius must be >= 4|x|");
  if (cert.D0 == 0.0 || cert.D1 == 0.0) return 0.0;
  const double tau = params.tau();
  const double nu = 1.5 + 0.5 * order;

  // For |x| <= |y|/4 and a = y + tau t e1, |a - e^{t Omega} x| >= |a|/2 when
  // |a| >= |y|/2; otherwise y lies upstream, t >= 0.366 |y|/tau, and the set
  // of such t has length <= |y|/tau.
  auto J = [&](double rho, double mu) {
    const Vec3 y(rho * mu, rho * std::sqrt(std::max(0.0, 1.0 - mu * mu)), 0.0);
    const double tp = std::max(0.0, -y[0] / tau);
    const double ts = std::max(1.0, tp);
    const double width = 2.0 * std::sqrt(tp + 1.0) / tau;
    using S = Eigen::Matrix<double, 1, 1>;
    auto g = [&](double s) -> S {
      if (s >= 1.0) return S::Zero();
      const double t = ts * s / (1.0 - s);
      const Vec3 a = y + tau * t * kE1;
      return S::Constant(std::pow(a.squaredNorm() + t, -nu) * ts / ((1.0 - s) * (1.0 - s)));
    };
    std::vector<double> br{0.0, 1.0};
    for (double k : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
      const double t = tp + k * width;
      if (t > 0.0) br.push_back(t / (t + ts));
    }
    std::sort(br.begin(), br.end());
    const auto r = integrate_adaptive<S>(g, br, AdaptiveOptions{1e-4, 1e-300, 40});
    double gap = 0.0;
    if (y[0] < -0.5 * std::sqrt(3.0) * rho) {
      gap = (rho / tau) * std::pow((0.5 * std::sqrt(3.0) - 0.5) * rho / tau, -nu);
    }
    return std::pow(4.0, nu) * r.value(0, 0) + gap;
  };

  double total = 0.0;
  const std::vector<double> sb{0.0, 0.125, 0.25, 0.5, 1.0};
  std::vector<double> vb{0.0, 2.0};
  for (double v = 1e-7; v < 1.0; v *= 4.0) {
    vb.push_back(v);
    vb.push_back(2.0 - v);
  }
  sort_unique(vb, 1e-15);
  for (std::size_t i = 0; i + 1 < sb.size(); ++i) {
    const GaussRule gs = gauss_legendre(12, sb[i], sb[i + 1]);
    for (std::size_t a = 0; a < gs.nodes.size(); ++a) {
      const double sigma = gs.nodes[a];
      const double rho = T / sigma;
      const double wr = gs.weights[a] * T / (sigma * sigma) * rho * rho;
      for (std::size_t p = 0; p + 1 < vb.size(); ++p) {
        const GaussRule gv = gauss_legendre(8, vb[p], vb[p + 1]);
        for (std::size_t b = 0; b < gv.nodes.size(); ++b) {
          const double mu = 1.0 - gv.nodes[b];
          const double s = 1.0 + tau * rho * gv.nodes[b];
          const double q = std::pow(rho * s, -2.5);
          total += wr * gv.weights[b] * 2.0 * kPi * q * J(rho, mu);
        }
      }
    }
  }
  // Factor 2 covers the quadrature of the majorant itself.
  return 2.0 * lambda_majorant_constant(order) * cert.D0 * cert.D1 * total;
}

ExpansionValue remainder_II(const Vec3& x, const MultiIndex& alpha,
                            const ExteriorField& field, const BoundaryMesh& mesh,
                            const FlowParams& params, const QuadSpec& spec,
                            double truncation_radius, const VolumeOptions& opt) {
  const int axis = derivative_axis(alpha);
  const double xr = x.norm();
  const double body = field.body_radius();
  if (!(xr > body)) throw PreconditionError("x must lie outside the body");
  const double T = truncation_radius > 0.0 ? truncation_radius : std::max(16.0 * xr, 160.0);
  if (T < 4.0 * xr) throw PreconditionError("truncation radius must be >= 4|x|");
  const DecayCertificate& cert = field.certificate();

  std::vector<SourceNode> nodes;
  for (int ch = 0; ch < 2; ++ch) {
    for (const VolumeNode& vn : volume_nodes(x, body, T, params, opt, ch == 1)) {
      const Vec3 u = field.u(vn.y);
      const Mat3 g = field.grad(vn.y);
      cert.check(vn.y, u, g);
      SourceNode node;
      node.y = vn.y;
      node.a = vn.weight * (g * u);
      node.channel = ch;
      if (!node.a.isZero(0.0)) nodes.push_back(node);
    }
  }
  Vec3 surface = Vec3::Zero();
  for (const MeshNode& m : mesh.nodes) {
    const Vec3 u = field.u(m.point);
    cert.check(m.point, u, field.grad(m.point));
    surface += m.weight * m.normal.dot(u) * u;
  }
  if (!surface.isZero(0.0)) {
    SourceNode origin;
    origin.y = Vec3::Zero();
    origin.a = surface;
    nodes.push_back(origin);
  }

  const auto r = fused_sum<2>(x, axis, nodes, params, spec, "remainder_II");
  ExpansionValue v;
  v.value = r.value.col(0);
  const double grid = (r.value.col(0) - r.value.col(1)).cwiseAbs().maxCoeff();
  v.error = r.error + grid + remainder_tail_bound(x, alpha, cert, T, params);
  v.evaluations = r.evaluations;
  return v;
}

double rotation_divergence_identity_check(const VectorField& u, double t, const Vec3& z,
                                          const FlowParams& params) {
  const Mat3 A = rotation(t, params, +1);
  const Vec3 y = A * z;
  const Vec3 uy = u.value(y);
  const Mat3 G = u.jacobian(y);
  const Vec3 lhs = G * uy;
  Vec3 rhs = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      // d/dz_m [(u_l u_k)(A z)] = sum_p d_p(u_l u_k)(y) A_pm.
      Vec3 dz = Vec3::Zero();
      for (int m = 0; m < 3; ++m) {
        for (int p = 0; p < 3; ++p) {
          dz[m] += (G(l, p) * uy[k] + uy[l] * G(k, p)) * A(p, m);
        }
      }
      rhs[k] += A.row(l).dot(dz);
    }
  }
  return (lhs - rhs).norm();
}

}  // namespace oseen_rotor
