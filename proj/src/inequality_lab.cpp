#include "oseen_rotor/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "oseen_rotor/rng.hpp"

namespace oseen_rotor {

namespace {

struct RatioStats {
  double max = 0.0;
  double min = std::numeric_limits<double>::infinity();
  bool finite = true;

  void add(double r) {
    if (!std::isfinite(r) || r < 0.0) {
      finite = false;
      return;
    }
    max = std::max(max, r);
    min = std::min(min, r);
  }
};

// Fills max/min/stability/passed from the ratios and a mask of the base set.
void settle_verdict(LemmaVerdict& v, const std::vector<double>& ratios,
                    const std::vector<bool>& in_base) {
  RatioStats all;
  RatioStats base;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    all.add(ratios[i]);
    if (in_base[i]) base.add(ratios[i]);
  }
  v.sample_count = static_cast<int>(ratios.size());
  v.max_ratio = all.max;
  v.min_ratio = all.min;
  v.stability = base.max > 0.0 ? all.max / base.max
                               : std::numeric_limits<double>::infinity();
  v.passed = all.finite && !ratios.empty() && std::isfinite(v.max_ratio) &&
             v.stability <= 1.0 + kStabilityTolerance;
}

double wake_scale(const Vec3& y, double tau) { return y.norm() * s_tau(y, tau); }

}  // namespace

LemmaVerdict verify_time_integral_far(double nu, const std::vector<Vec3>& y_samples,
                                      const std::vector<Vec3>& z_samples,
                                      const FlowParams& params, const QuadSpec& spec,
                                      const LabGeometry& geometry, int jobs) {
  if (!(nu > 1.0)) throw DomainError("time-integral lemma needs nu > 1");
  if (y_samples.empty()) throw PreconditionError("no y samples");
  if (z_samples.size() != 1 && z_samples.size() != y_samples.size()) {
    throw PreconditionError("z_samples must hold one entry or one per y");
  }
  if (!(geometry.S1 < geometry.S)) throw PreconditionError("need S1 < S");
  for (const Vec3& y : y_samples) {
    if (!(y.norm() >= geometry.S)) {
      throw PreconditionError("sample y with |y| < S");
    }
  }
  for (const Vec3& z : z_samples) {
    if (!(z.norm() <= geometry.S1)) {
      throw PreconditionError("sample z with |z| > S1");
    }
  }
  auto z_of = [&](std::size_t i) -> const Vec3& {
    return z_samples.size() == 1 ? z_samples[0] : z_samples[i];
  };
  const std::size_t n = y_samples.size();
  const auto ratios = parallel_map<double>(n, jobs, [&](std::size_t i) {
    const Vec3& y = y_samples[i];
    const double lhs = majorant_time_integral(y, z_of(i), nu, params, spec).value;
    return lhs / std::pow(wake_scale(y, params.tau()), 0.5 - nu);
  });

  double r_top = 0.0;
  double r_bottom = std::numeric_limits<double>::infinity();
  for (const Vec3& y : y_samples) {
    r_top = std::max(r_top, y.norm());
    r_bottom = std::min(r_bottom, y.norm());
  }
  std::vector<bool> base(n);
  const bool decade = r_top >= 10.0 * r_bottom;
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = decade ? y_samples[i].norm() <= r_top / 10.0 : i < (n + 1) / 2;
  }
  LemmaVerdict v;
  v.lemma_id = "time-integral-far";
  v.parameter_set = {{"nu", nu},
                     {"tau", params.tau()},
                     {"rho", params.rho()},
                     {"S1", geometry.S1},
                     {"S", geometry.S}};
  settle_verdict(v, ratios, base);
  return v;
}

LemmaVerdict verify_time_integral_near(int k, double R,
                                       const std::vector<SamplePair>& pairs,
                                       const FlowParams& params, const QuadSpec& spec,
                                       int jobs) {
  if (k != 0 && k != 1) throw UnsupportedOrderError("near-field lemma needs k in {0, 1}");
  if (!(R > 0.0)) throw DomainError("R must be positive");
  if (pairs.empty()) throw PreconditionError("no sample pairs");
  double d_min = std::numeric_limits<double>::infinity();
  for (const auto& [y, z] : pairs) {
    if (y.norm() > R || z.norm() > R) throw PreconditionError("sample outside B_R");
    if (y == z) throw SingularPointError("singular: y=z");
    d_min = std::min(d_min, (y - z).norm());
  }
  const double nu = 1.5 + 0.5 * k;
  const auto ratios = parallel_map<double>(pairs.size(), jobs, [&](std::size_t i) {
    const auto& [y, z] = pairs[i];
    const double lhs = majorant_time_integral(y, z, nu, params, spec).value;
    return lhs * std::pow((y - z).norm(), 1.0 + k);
  });
  std::vector<bool> base(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    base[i] = (pairs[i].y - pairs[i].z).norm() >= 10.0 * d_min;
  }
  // Without a decade of separations, compare against the first half.
  if (std::none_of(base.begin(), base.end(), [](bool b) { return b; })) {
    for (std::size_t i = 0; i < pairs.size(); ++i) base[i] = i < (pairs.size() + 1) / 2;
  }
  LemmaVerdict v;
  v.lemma_id = "time-integral-near";
  v.parameter_set = {{"k", static_cast<double>(k)},
                     {"R", R},
                     {"tau", params.tau()},
                     {"rho", params.rho()}};
  settle_verdict(v, ratios, base);
  return v;
}

namespace {

std::vector<MultiIndex> indices_of_order(int order) {
  std::vector<MultiIndex> out;
  for (int a = order; a >= 0; --a) {
    for (int b = order - a; b >= 0; --b) out.emplace_back(a, b, order - a - b);
  }
  return out;
}

// Up to 9 (alpha, beta) combinations of 3x3 blocks side by side.
using Stack = Eigen::Matrix<double, 3, 27>;

double derivative_norm(const Vec3& y, const Vec3& z, const MultiIndex& alpha,
                       const MultiIndex& beta, bool full_order,
                       const FlowParams& params, const QuadSpec& spec) {
  if (!full_order) {
    return z_derivative(y, z, params, alpha, beta, spec).value.norm();
  }
  if (y == z) throw SingularPointError("singular: y=z");
  std::vector<std::pair<MultiIndex, MultiIndex>> combos;
  for (const auto& a : indices_of_order(alpha.order())) {
    for (const auto& b : indices_of_order(beta.order())) combos.emplace_back(a, b);
  }
  const auto features = feature_times({{y, z}}, params);
  auto f = [&](double t, double phase) -> Stack {
    const KernelSlice slice(t, phase, params);
    Stack s = Stack::Zero();
    for (std::size_t c = 0; c < combos.size(); ++c) {
      s.block<3, 3>(0, 3 * static_cast<Eigen::Index>(c)) =
          slice.derivative(y, z, combos[c].first, combos[c].second);
    }
    return s;
  };
  const auto r = integrate_time<Stack>(f, features, spec, params);
  if (!r.converged) {
    throw AccuracyError("derivative tensor quadrature did not converge",
                        r.value.block<3, 3>(0, 0), r.error);
  }
  return r.value.norm();
}

}  // namespace

LemmaVerdict verify_z_far_field(const MultiIndex& alpha, const MultiIndex& beta,
                                const FlowParams& params, const QuadSpec& spec,
                                const FarFieldOptions& options, int jobs) {
  check_derivative_order(alpha, beta);
  const LabGeometry& g = options.geometry;
  if (!(options.r_min >= g.S) || !(options.r_max > options.r_min) ||
      !(g.S_max > g.S) || !(g.S1 < g.S)) {
    throw PreconditionError("far-field check needs S1 < S <= r_min < r_max, S < S_max");
  }
  if (options.radii_per_ray < 2 || options.random_samples < 0) {
    throw DomainError("far-field check needs >= 2 radii per ray");
  }
  const int order = alpha.order() + beta.order();
  const double tau = params.tau();
  const double power = -1.0 - 0.5 * order;
  auto envelope = [&](const Vec3& y) { return std::pow(wake_scale(y, tau), power); };

  const auto radii = geometric_radii(options.r_min, options.r_max, options.radii_per_ray);
  struct Ray {
    Vec3 dir;
    bool across_wake;
  };
  std::vector<Ray> rays{{kE1, false}, {Vec3(0.0, 1.0, 0.0), false}, {-kE1, false}};
  if (order > 0) rays.push_back({kE1, true});
  constexpr int kWakeOffsets = 4;

  // One task per (ray, radius, wake offset), then the random samples.
  struct Task {
    Vec3 y;
    Vec3 z;
  };
  std::vector<Task> tasks;
  for (const Ray& ray : rays) {
    for (double r : radii) {
      if (!ray.across_wake) {
        tasks.push_back({r * ray.dir, Vec3::Zero()});
        continue;
      }
      for (int c = 0; c < kWakeOffsets; ++c) {
        tasks.push_back({Vec3(r, c * std::sqrt(r), 0.0), Vec3::Zero()});
      }
    }
  }
  const std::size_t ray_tasks = tasks.size();
  const CounterRng rng(options.seed, 0x7a);
  const double log_span = std::log(g.S_max / g.S);
  for (int i = 0; i < options.random_samples; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const double r = g.S * std::exp(log_span * rng.uniform(8 * k));
    const double rz = g.S1 * std::cbrt(rng.uniform(8 * k + 1));
    tasks.push_back({r * rng.unit_vector(4 * k + 1), rz * rng.unit_vector(4 * k + 2)});
  }
  const auto values = parallel_map<double>(tasks.size(), jobs, [&](std::size_t i) {
    return derivative_norm(tasks[i].y, tasks[i].z, alpha, beta, options.full_order,
                           params, spec);
  });

  LemmaVerdict v;
  v.lemma_id = "z-far-field";
  v.parameter_set = {{"alpha1", double(alpha.a[0])}, {"alpha2", double(alpha.a[1])},
                     {"alpha3", double(alpha.a[2])}, {"beta1", double(beta.a[0])},
                     {"beta2", double(beta.a[1])},   {"beta3", double(beta.a[2])},
                     {"tau", tau},                   {"rho", params.rho()},
                     {"S1", g.S1},                   {"S", g.S},
                     {"S_max", g.S_max}};
  const std::string env_name =
      "(|y| s_tau(y))^" + std::to_string(power).substr(0, 4);

  RatioStats all;
  bool stable = true;
  double worst_stability = 0.0;
  std::size_t cursor = 0;
  for (const Ray& ray : rays) {
    std::vector<double> vals;
    std::vector<double> ratio_at;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      double best = 0.0;
      double best_ratio = 0.0;
      const int offsets = ray.across_wake ? kWakeOffsets : 1;
      for (int c = 0; c < offsets; ++c, ++cursor) {
        const double ratio = values[cursor] / envelope(tasks[cursor].y);
        if (ratio >= best_ratio) {
          best_ratio = ratio;
          best = values[cursor];
        }
      }
      vals.push_back(best);
      ratio_at.push_back(best_ratio);
    }
    // Across the wake the envelope is r^{power}; on the rays it is exact.
    const Vec3 dir = ray.dir;
    auto major = [&, dir, across = ray.across_wake](double r) {
      return across ? std::pow(r, power) : envelope(r * dir);
    };
    DecayReport rep = fit_decay(dir, radii, vals, major,
                                ray.across_wake ? "max across wake of " + env_name
                                                : env_name);
    RatioStats base;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      all.add(ratio_at[j]);
      if (radii[j] <= options.r_max / 10.0 || j < 2) base.add(ratio_at[j]);
    }
    const double s = rep.envelope_ratio_max / base.max;
    worst_stability = std::max(worst_stability, s);
    stable = stable && s <= 1.0 + kStabilityTolerance;
    v.reports.push_back(std::move(rep));
  }
  if (cursor != ray_tasks) throw Error("far-field task bookkeeping mismatch");

  RatioStats first_half;
  RatioStats random_all;
  const auto n_rand = static_cast<std::size_t>(options.random_samples);
  for (std::size_t i = 0; i < n_rand; ++i) {
    const double ratio = values[ray_tasks + i] / envelope(tasks[ray_tasks + i].y);
    all.add(ratio);
    random_all.add(ratio);
    if (i < (n_rand + 1) / 2) first_half.add(ratio);
  }
  if (n_rand > 1) {
    const double s = random_all.max / first_half.max;
    worst_stability = std::max(worst_stability, s);
    stable = stable && s <= 1.0 + kStabilityTolerance;
  }
  v.sample_count = static_cast<int>(tasks.size());
  v.max_ratio = all.max;
  v.min_ratio = all.min;
  v.stability = worst_stability;
  v.passed = all.finite && std::isfinite(all.max) && stable;
  return v;
}

LemmaVerdict verify_sphere_integral(double beta, double tau, double r0, double r1,
                                    int n_radii) {
  const auto radii = geometric_radii(r0, r1, n_radii);
  std::vector<double> values;
  values.reserve(radii.size());
  for (double r : radii) values.push_back(sphere_integral_weight(r, beta, tau));
  LemmaVerdict v;
  v.lemma_id = "sphere-integral";
  v.parameter_set = {{"beta", beta}, {"tau", tau}, {"r0", r0}, {"r1", r1}};
  DecayReport rep =
      fit_decay(kE1, radii, values, [](double r) { return r; }, "r");
  std::vector<double> ratios(radii.size());
  std::vector<bool> base(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    ratios[i] = values[i] / radii[i];
    base[i] = radii[i] <= r1 / 10.0 || i < 2;
  }
  settle_verdict(v, ratios, base);
  v.reports.push_back(std::move(rep));
  return v;
}

LemmaVerdict verify_shift_bound(double tau, std::uint64_t seed, int samples, double R,
                                double d_max) {
  if (samples < 2) throw DomainError("shift bound needs >= 2 samples");
  const CounterRng rng(seed, 0x5e);
  std::vector<double> ratios(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const Vec3 x = R * std::cbrt(rng.uniform(8 * k)) * rng.unit_vector(4 * k + 1);
    const Vec3 z = x + d_max * std::cbrt(rng.uniform(8 * k + 1)) * rng.unit_vector(4 * k + 2);
    ratios[static_cast<std::size_t>(i)] = shift_weight_bound(x, z, tau);
  }
  std::vector<bool> base(ratios.size());
  for (std::size_t i = 0; i < base.size(); ++i) base[i] = i < base.size() / 2;
  LemmaVerdict v;
  v.lemma_id = "shift-bound";
  v.parameter_set = {{"tau", tau}, {"R", R}, {"d_max", d_max},
                     {"seed", static_cast<double>(seed)}};
  settle_verdict(v, ratios, base);
  return v;
}

}  // namespace oseen_rotor
