#include <cmath>

#include "reluinj/errors.hpp"
#include "reluinj/gaussian.hpp"
#include "reluinj/kernels.hpp"

namespace reluinj {

FhatTerms fhat_terms(double A, double B, double C, double nu) {
  if (!(A > 0.0) || !(C >= 0.0) || !(nu >= 0.0) || !std::isfinite(B)) {
    throw DomainError("fhat: requires A > 0, C >= 0, nu >= 0");
  }
  const double a0 = -B / A;
  const double a2 = (std::sqrt(2.0 * nu) - B) / A;

  const double log_below = log_normal_cdf(a0);
  const I1Partials mid = i1_partials({A, B, C, a0, a2});
  const double log_above = -2.0 * C * nu + log_normal_sf(a2);
  const double log_s = log_sum_exp(log_below, mid.log_value, log_above);
  if (!std::isfinite(log_s)) throw DomainError("fhat: inner expectation underflowed");

  const double w_below = std::exp(log_below - log_s);
  const double w_mid = std::exp(mid.log_value - log_s);
  const double w_above = std::exp(log_above - log_s);
  const double e1 = mid.t_mean;
  const double e2 = mid.t_sq_mean;

  FhatTerms out;
  out.log_value = C * nu + log_s;
  out.dlog_A = -2.0 * C * w_mid * (A * e2 + B * e1);
  out.dlog_B = -2.0 * C * w_mid * (A * e1 + B);
  out.dlog_C = nu - w_mid * (A * A * e2 + 2.0 * A * B * e1 + B * B) - 2.0 * nu * w_above;
  out.dlog_nu = C * (w_below + w_mid - w_above);
  return out;
}

SphereSide sphere_side_level2(double c2, double q2, double gamma_q) {
  const double s1 = 2.0 * gamma_q - c2 * (1.0 - q2);
  if (!(s1 > 0.0) || !(c2 > 0.0) || !(gamma_q > 0.0)) {
    throw DomainError("sphere side: 2*gamma_q - c2*(1-q2) must be positive");
  }
  SphereSide out;
  const double log_ratio = std::log(s1 / (2.0 * gamma_q));
  out.value = -log_ratio / (2.0 * c2) + q2 / (2.0 * s1);
  const double s1_c2 = -(1.0 - q2);
  out.d_c2 = log_ratio / (2.0 * c2 * c2) - s1_c2 / (2.0 * c2 * s1) - q2 * s1_c2 / (2.0 * s1 * s1);
  out.d_q2 = -q2 * c2 / (2.0 * s1 * s1);
  out.d_gamma_q = -(2.0 / s1 - 1.0 / gamma_q) / (2.0 * c2) - q2 / (s1 * s1);
  return out;
}

SphereSide sphere_side_level3(double c2, double c3, double q2, double q3, double gamma_q) {
  const double s1 = 2.0 * gamma_q - c2 * (1.0 - q2);
  const double s2 = s1 - c3 * (q2 - q3);
  if (!(s1 > 0.0) || !(s2 > 0.0) || !(c2 > 0.0) || !(c3 > 0.0) || !(gamma_q > 0.0)) {
    throw DomainError("sphere side: both log arguments must be positive");
  }
  const double log_1 = std::log(s1 / (2.0 * gamma_q));
  const double log_2 = std::log(s2 / s1);
  SphereSide out;
  out.value = -log_1 / (2.0 * c2) - log_2 / (2.0 * c3) + q3 / (2.0 * s2);

  // Shared chain rule through s1 and s2; `own_gamma` flags the explicit 1/gamma_q term.
  auto through = [&](double s1_d, double s2_d, bool own_gamma) {
    return -(s1_d / s1 - (own_gamma ? 1.0 / gamma_q : 0.0)) / (2.0 * c2) -
           (s2_d / s2 - s1_d / s1) / (2.0 * c3) - q3 * s2_d / (2.0 * s2 * s2);
  };
  out.d_c2 = log_1 / (2.0 * c2 * c2) + through(-(1.0 - q2), -(1.0 - q2), false);
  out.d_c3 = log_2 / (2.0 * c3 * c3) + through(0.0, -(q2 - q3), false);
  out.d_q2 = through(c2, c2 - c3, false);
  out.d_q3 = 1.0 / (2.0 * s2) + through(0.0, c3, false);
  out.d_gamma_q = through(2.0, 2.0, true);
  return out;
}

}  // namespace reluinj
