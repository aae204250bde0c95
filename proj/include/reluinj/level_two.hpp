#pragma once

#include <vector>

#include "reluinj/model.hpp"

namespace reluinj {

// ---- partial lifting (p2 = q2 = 0, c2 free) ----

/// Stationary gamma_q of the partial lifting: (c2 + sqrt(c2^2 + 4)) / 4.
double gamma_q_partial(double c2);

/// Closed-form partially lifted free energy with gamma_q eliminated.
/// Throws DomainError when the log or f-tilde arguments leave their domain.
double psi2_partial(double alpha, double c2, double gamma_p, double nu);

/// Residuals d/dc2, d/dgamma_p, d/dnu (gamma_q held at its stationary value).
std::vector<Residual> grad_psi2_partial(double alpha, double c2, double gamma_p, double nu);
double dpsi2_partial_dalpha(double alpha, double c2, double gamma_p, double nu);

/// Partial lifting at arbitrary gamma_q (point must have r = 2 and p2 = q2 = 0), with
/// residuals d/dc2, d/dgamma_q, d/dgamma_p, d/dnu.
EvalResult evaluate_level2_partial(const EvalPoint& point);

// ---- full second level ----

/// Exact inner expectation over u_2 of Z^(2) at a fixed u3 realization.
double fhat2_level2(double u3, double p2, double c2, double gamma_p, double nu);

/// Second-level free energy. The u3 expectation uses cfg.nodes_single Gauss-Hermite nodes.
/// The returned result carries the value only; see evaluate_level2 for residuals.
EvalResult psi2_full(const EvalPoint& point, const QuadConfig& cfg);

/// Analytic partials in the order d/dc2, d/dp2, d/dq2, d/dgamma_q, d/dgamma_p, d/dnu.
/// Requires p2 > 0 (the p2-derivative is singular at the boundary).
std::vector<Residual> grad_psi2(const EvalPoint& point, const QuadConfig& cfg);

/// Value plus residuals in one pass.
EvalResult evaluate_level2(const EvalPoint& point, const QuadConfig& cfg);

/// Partial derivative of the second-level free energy in alpha.
double dpsi2_dalpha(const EvalPoint& point, const QuadConfig& cfg);

struct ClosedForm2 {
  double gamma_q = 0.0;
  double c2 = 0.0;
  double gamma_p = 0.0;
};

/// Relations tying gamma_q, c2 and gamma_p to (p2, q2) at the second-level saddle.
/// Requires 0 < q2, 0 < p2 < 1, q2 < 1; throws DomainError otherwise.
ClosedForm2 closed_form_r2(double p2, double q2);

}  // namespace reluinj
