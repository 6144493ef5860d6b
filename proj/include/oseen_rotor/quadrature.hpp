#pragma once

// Generic integration rules: Gauss-Legendre nodes of any order and a globally
// adaptive Gauss-Kronrod (7/15) integrator for fixed-size Eigen values.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

/// n-point Gauss-Legendre rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

template <class V>
double abs_max(const V& v) {
  return v.cwiseAbs().maxCoeff();
}

struct AdaptiveOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-10;
  int max_subdivisions = 60;
};

template <class V>
struct AdaptiveResult {
  V value;
  double error = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
  bool converged = false;
};

namespace detail {

template <class V>
struct Panel {
  double a;
  double b;
  V value;
  double error;
};

template <class V, class F>
Panel<V> gk15_panel(F& f, double a, double b, int& evaluations) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);

  const V fc = f(c);
  V kron = wk[0] * fc;
  V gauss = wg[0] * fc;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const V sum = f(c - h * xk[i]) + f(c + h * xk[i]);
    kron += wk[i] * sum;
    // Gauss-7 nodes sit at the even Kronrod indices.
    if (i % 2 == 0) gauss += wg[i / 2] * sum;
  }
  evaluations += 15;
  kron *= h;
  gauss *= h;
  return Panel<V>{a, b, kron, abs_max<V>(kron - gauss)};
}

}  // namespace detail

/// Integrates f over the union of [breaks[i], breaks[i+1]], bisecting the
/// panel with the largest error until the summed |K15 - G7| estimate drops
/// below max(abs_tol, rel_tol * max|value|) or max_subdivisions bisections
/// have been spent.
/// `base`, when given, is added to the running value before the relative
/// test, for pieces of a larger integral that share one tolerance.
template <class V, class F>
AdaptiveResult<V> integrate_adaptive(F&& f, const std::vector<double>& breaks,
                                     const AdaptiveOptions& opt,
                                     const V* base = nullptr) {
  using detail::Panel;
  AdaptiveResult<V> out;
  out.value = V::Zero();
  std::vector<Panel<V>> heap;
  heap.reserve(breaks.size() + static_cast<std::size_t>(opt.max_subdivisions) + 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    heap.push_back(detail::gk15_panel<V>(f, breaks[i], breaks[i + 1],
                                         out.evaluations));
  }
  auto by_error = [](const Panel<V>& l, const Panel<V>& r) {
    return l.error < r.error;
  };
  std::make_heap(heap.begin(), heap.end(), by_error);

  auto totals = [&](V& value, double& error) {
    value = V::Zero();
    error = 0.0;
    for (const auto& p : heap) {
      value += p.value;
      error += p.error;
    }
  };

  V value;
  double error = 0.0;
  totals(value, error);
  while (true) {
    const double scale =
        base ? abs_max<V>(V(value + *base)) : abs_max<V>(value);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * scale);
    if (error <= tol || heap.empty()) {
      out.converged = true;
      break;
    }
    if (out.subdivisions >= opt.max_subdivisions) break;
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Panel<V> worst = heap.back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // panel at machine width
    heap.back() = detail::gk15_panel<V>(f, worst.a, mid, out.evaluations);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(detail::gk15_panel<V>(f, mid, worst.b, out.evaluations));
    std::push_heap(heap.begin(), heap.end(), by_error);
    ++out.subdivisions;
    // Incremental update accumulates rounding; resum from the panels.
    totals(value, error);
  }
  out.value = value;
  out.error = error;
  return out;
}

}  // namespace oseen_rotor
