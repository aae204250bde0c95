#pragma once

namespace reluinj {

/// log of the exact inner expectation E_t exp(-C * (ubar^2 + phi_bar_z(ubar, nu))) with
/// ubar = A t + B, t ~ N(0,1), together with its logarithmic partial derivatives.
///
/// The expectation splits at ubar = 0 and ubar = sqrt(2 nu) into
///   e^{C nu} Phi(a0) + e^{C nu} I1(A, B, C, a0, a2) + e^{-C nu} (1 - Phi(a2)),
/// a0 = -B/A, a2 = (sqrt(2 nu) - B)/A. The e^{C nu} factor is carried in the log so
/// large C nu never overflows. The integrand is continuous in ubar, so the terms coming
/// from the moving split points cancel and only the explicit parameter dependence
/// survives in the derivatives.
struct FhatTerms {
  double log_value = 0.0;
  double dlog_A = 0.0;
  double dlog_B = 0.0;
  double dlog_C = 0.0;
  double dlog_nu = 0.0;
};

/// Requires A > 0, C >= 0, nu >= 0 (DomainError otherwise).
FhatTerms fhat_terms(double A, double B, double C, double nu);

/// Sphere-side log terms subtracted from the free energy at level two (c3 = 0 path)
/// and level three, with partials in every variable they touch.
struct SphereSide {
  double value = 0.0;
  double d_c2 = 0.0;
  double d_c3 = 0.0;
  double d_q2 = 0.0;
  double d_q3 = 0.0;
  double d_gamma_q = 0.0;
};

/// -(1/(2c2)) log(s1/(2 gq)) + q2/(2 s1), s1 = 2 gq - c2 (1 - q2).
SphereSide sphere_side_level2(double c2, double q2, double gamma_q);

/// -(1/(2c2)) log(s1/(2 gq)) - (1/(2c3)) log(s2/s1) + q3/(2 s2), s2 = s1 - c3 (q2 - q3).
SphereSide sphere_side_level3(double c2, double c3, double q2, double q3, double gamma_q);

}  // namespace reluinj
