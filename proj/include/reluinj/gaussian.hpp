#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "reluinj/errors.hpp"

namespace reluinj {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Complementary error function.
double erfc(double x);

/// Scaled complementary error function e^{x^2} erfc(x); finite for all finite x >= 0
/// and usable wherever e^{a} erfc(b) would overflow or underflow when formed directly.
double erfcx(double x);

/// log(erfc(x)) without underflow for large positive x.
double log_erfc(double x);

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate in the far tail.
double normal_sf(double x);
double log_normal_cdf(double x);
double log_normal_sf(double x);

/// log(Phi(hi) - Phi(lo)) for lo <= hi, evaluated on the tail where cancellation is smallest.
/// Returns -inf for an empty interval.
double log_normal_interval(double lo, double hi);

/// Nodes and weights for expectations against N(0,1): E f(X) ~ sum_i w_i f(x_i).
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Hermite rule with n nodes, exact for polynomials of degree <= 2n-1.
/// Throws std::invalid_argument unless 1 <= n <= 256.
QuadRule gauss_hermite(int n);

/// Same rule, built once per n and shared for the lifetime of the process.
const QuadRule& cached_gauss_hermite(int n);

/// sum_i w_i f(x_i) in node order. A non-finite f(x_i) raises EvaluationError naming x_i.
template <class F>
double expect_gaussian(F&& f, const QuadRule& rule) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v)) {
      throw EvaluationError("non-finite integrand value", rule.nodes[i]);
    }
    acc += rule.weights[i] * v;
  }
  return acc;
}

/// Parameters of I1: the integral over [D, F] of n(t) exp(-C (A t + B)^2).
struct GaussianQuadratic {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  double F = 0.0;
};

/// Closed form of I1. Requires C >= 0 and D <= F (std::invalid_argument otherwise);
/// a non-finite result raises DomainError.
double i1(const GaussianQuadratic& g);

/// I1 and its partial derivatives. dA, dB and dC hold the limits D and F fixed.
struct I1Partials {
  double value = 0.0;
  double log_value = 0.0;
  double dA = 0.0;
  double dB = 0.0;
  double dC = 0.0;
  double dD = 0.0;
  double dF = 0.0;
  /// First and second moments of t under the normalized integrand on [D, F].
  double t_mean = 0.0;
  double t_sq_mean = 0.0;
};

I1Partials i1_partials(const GaussianQuadratic& g);

/// Numerically stable log(sum exp(terms)).
double log_sum_exp(double a, double b);
double log_sum_exp(double a, double b, double c);

}  // namespace reluinj
