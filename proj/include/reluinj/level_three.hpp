#pragma once

#include <vector>

#include "reluinj/model.hpp"

namespace reluinj {

/// Exact inner expectation over u_2 of Z^(3) at fixed (u3, u4). Needs 0 <= p3 <= p2 < 1.
double fhat2_level3(double u3, double u4, double p2, double p3, double c2, double gamma_p,
                    double nu);

/// Third-level free energy on a cfg.nodes_inner (u3) x cfg.nodes_outer (u4) Gauss-Hermite
/// grid. Value only; see evaluate_level3 for residuals.
EvalResult psi3_full(const EvalPoint& point, const QuadConfig& cfg);

/// Analytic partials in the order d/dc2, d/dc3, d/dp2, d/dp3, d/dq2, d/dq3, d/dgamma_q,
/// d/dgamma_p, d/dnu. The p-derivatives need 0 < p3 < p2 strictly.
std::vector<Residual> grad_psi3(const EvalPoint& point, const QuadConfig& cfg);

EvalResult evaluate_level3(const EvalPoint& point, const QuadConfig& cfg);

double dpsi3_dalpha(const EvalPoint& point, const QuadConfig& cfg);

struct ClosedForm3 {
  double gamma_q = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double gamma_p = 0.0;
};

/// Relations tying gamma_q, c2, c3 and gamma_p to (p2, p3, q2, q3) at the third-level
/// saddle. Needs 0 < p3 < p2 < 1 and 0 < q3 < q2 < 1; coincident entries are singular.
ClosedForm3 closed_form_r3(double p2, double p3, double q2, double q3);

}  // namespace reluinj
