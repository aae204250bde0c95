#pragma once

#include <utility>

#include "reluinj/model.hpp"

namespace reluinj {

/// Closed form of E[u^2 + phi_bar_z(u, nu)] - 1 for u ~ N(0,1).
double fbar2(double nu);

/// alpha (1 + fbar2(nu)) - nu (2 - alpha); the level-1 free energy is -1 + sqrt of this.
double psi1_radicand(double alpha, double nu);
/// d/dnu of psi1_radicand, which simplifies to alpha*erfc(sqrt(nu)) - 2.
double psi1_radicand_dnu(double alpha, double nu);

/// Level-1 lifted free energy. Throws DomainError on a negative radicand.
double psi1(double alpha, double nu);
double dpsi1_dnu(double alpha, double nu);
double dpsi1_dalpha(double alpha, double nu);

/// Stationary nu at the given alpha, found by bracketed root finding on the radicand
/// derivative. Requires alpha > 2; throws BracketError when no root is bracketed.
double solve_nu1(double alpha);

struct Level1Gammas {
  double gamma_q = 0.5;
  double gamma_p = 0.5;
};

/// Closed-form saddle multipliers: gamma_q = 1/2, gamma_p = sqrt(radicand)/2.
Level1Gammas gamma1(double alpha, double nu);

/// Level-1 free energy at arbitrary (gamma_q, gamma_p, nu) before the multipliers are
/// eliminated, with residuals d/dgamma_q, d/dgamma_p, d/dnu. Reduces to psi1 at gamma1.
EvalResult evaluate_level1(const EvalPoint& point);

}  // namespace reluinj
