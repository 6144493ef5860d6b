#pragma once

// Weighted convolutions eta^{-a}_{-b} * eta^{-c}_{-d} in R^3, with
// eta^alpha_beta(x) = (1 + |x|)^alpha s(x)^beta and s = s_1: the exponent
// predictor built from the region table and a Monte-Carlo evaluator.

#include <array>
#include <cstdint>
#include <string>

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

struct ConvInput {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  static constexpr int N = 3;
};

/// Bound eta^{-e}_{-f} ln^{log_power}(2 + |x|).
struct ConvExponents {
  double e = 0.0;
  double f = 0.0;
  int log_power = 0;
  int contributing_region = 0;
};

/// Exponents (e_i, f_i) of the regions that carry their own row in the table
/// (the rest refer back to these).
struct RegionRow {
  int region;
  double e;
  double f;
};

inline constexpr int kTableRows = 10;

std::array<RegionRow, kTableRows> region_rows(const ConvInput& in);

/// e = min e_i, e + f = min (e_i + f_i). A logarithmic factor of a region
/// counts when its predicate holds (equalities to 1e-12) and the region is
/// not absorbed, i.e. e_i = e or e_i + f_i = e + f.
ConvExponents predict_exponents(const ConvInput& in);

struct GammaCase {
  double gamma = 0.0;
  double c_out = 0.0;
  double d_out = 0.0;
  int k_out = 0;
};

/// Exponents for eta^{-3/2}_{-3/2} * eta^{-gamma}_{-gamma}, gamma > 1/4.
GammaCase gamma_case(double gamma);

struct ConvEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// Samples per deterministic chunk; chunk k draws from stream k.
inline constexpr std::int64_t kConvChunk = 4096;

/// Monte-Carlo estimate of
///   int (1 + |x - y|)^{-a} s(x - y)^{-b} (1 + |y|)^{-c} s(y)^{-d} dy
/// by importance sampling from an even mixture of two wake-shaped densities,
/// one centred at 0 and one at x (mirrored so its wake trails x). Each has
/// radial law ~ (1 + rho)^{-1-kappa} and polar law ~ (1 + rho v)^{-3/2},
/// v = 1 - cos(angle to the wake axis). Throws DivergentIntegralError unless
/// a + b* + c + d > 3 and a + b + c + d* > 3, r* = min(1, r).
ConvEstimate convolve_numeric(const ConvInput& in, const Vec3& x, std::int64_t budget,
                              std::uint64_t seed, int jobs = 1);

/// A short rational p/q (q <= 1000) when v is one to 1e-12, else decimal.
std::string format_exponent(double v);

}  // namespace oseen_rotor
