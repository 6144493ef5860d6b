#pragma once

// Numerical checks of the time-integral, near-field and far-field bounds.
// Each check evaluates both sides of an inequality on a sample set and
// reports the ratio envelope; the constants involved are never explicit, so
// a verdict passes when the envelope is finite and does not grow when the
// sample domain is extended.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "oseen_rotor/parallel.hpp"
#include "oseen_rotor/time_quadrature.hpp"
#include "oseen_rotor/wake_geometry.hpp"

namespace oseen_rotor {

/// Growth allowed when the sample domain is extended (or doubled).
inline constexpr double kStabilityTolerance = 0.25;

struct LemmaVerdict {
  std::string lemma_id;
  std::vector<std::pair<std::string, double>> parameter_set;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  /// max_ratio over the full sample set / max_ratio over the base set.
  double stability = 0.0;
  int sample_count = 0;
  bool passed = false;
  std::vector<DecayReport> reports;

  double spread() const { return max_ratio / min_ratio; }
};

/// Standing geometry: the body inside B_{S1}, far field beyond S.
struct LabGeometry {
  double S1 = 2.0;
  double S = 4.0;
  double S_max = 400.0;
};

struct SamplePair {
  Vec3 y;
  Vec3 z;
};

/// int_0^inf (|y - tau t e1 - e^{-t Omega} z|^2 + t)^{-nu} dt against
/// (|y| s_tau(y))^{-nu + 1/2}. z_samples holds one entry (shared) or one per
/// y. The base set is the samples with |y| <= max|y| / 10, or the first half
/// when the radii span less than a decade.
LemmaVerdict verify_time_integral_far(double nu, const std::vector<Vec3>& y_samples,
                                      const std::vector<Vec3>& z_samples,
                                      const FlowParams& params,
                                      const QuadSpec& spec = {},
                                      const LabGeometry& geometry = {},
                                      int jobs = 1);

/// The same integral with nu = 3/2 + k/2 against |y - z|^{-1-k}, for pairs
/// in B_R. The base set is the pairs with |y - z| >= 10 min|y - z|.
LemmaVerdict verify_time_integral_near(int k, double R,
                                       const std::vector<SamplePair>& pairs,
                                       const FlowParams& params,
                                       const QuadSpec& spec = {}, int jobs = 1);

struct FarFieldOptions {
  LabGeometry geometry;
  double r_min = 5.0;
  double r_max = 200.0;
  int radii_per_ray = 10;
  int random_samples = 192;
  std::uint64_t seed = 1;
  /// Use the norm of the whole derivative tensor of orders (|alpha|, |beta|)
  /// instead of the single component alpha, beta.
  bool full_order = false;
};

/// |d_y^alpha d_z^beta Z(y, z)| against (|y| s_tau(y))^{-1-|alpha+beta|/2}
/// on the downstream, transverse and upstream rays (z = 0), across the wake
/// for derivatives (max over y = (r, c sqrt(r), 0), c = 0..3), and at random
/// y in the annulus S <= |y| <= S_max with z in B_{S1}. Rays are checked for
/// growth beyond r_max / 10, random samples under doubling.
LemmaVerdict verify_z_far_field(const MultiIndex& alpha, const MultiIndex& beta,
                                const FlowParams& params, const QuadSpec& spec = {},
                                const FarFieldOptions& options = {}, int jobs = 1);

/// Integral of s_tau^{-beta} over spheres against r, radii geometric in
/// [r0, r1]. The ratio to r must stay bounded beyond r1 / 10; the fitted
/// log-log slope is attached in the report.
LemmaVerdict verify_sphere_integral(double beta, double tau, double r0 = 1.0,
                                    double r1 = 100.0, int n_radii = 12);

/// shift_weight_bound over random pairs with |x| <= R and |x - z| <= d_max;
/// passes when the maximum is stable under doubling the sample count.
LemmaVerdict verify_shift_bound(double tau, std::uint64_t seed, int samples = 100000,
                                double R = 100.0, double d_max = 5.0);

}  // namespace oseen_rotor
