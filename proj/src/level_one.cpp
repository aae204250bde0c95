#include "reluinj/level_one.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

#include "reluinj/errors.hpp"
#include "reluinj/gaussian.hpp"

namespace reluinj {

double fbar2(double nu) {
  if (!(nu >= 0.0)) throw DomainError("fbar2: nu must be nonnegative");
  const double a = std::sqrt(2.0 * nu);
  const double tail = reluinj::erfc(a / kSqrt2);
  const double fx = -(std::exp(-a * a / 2.0) * a / std::sqrt(2.0 * std::numbers::pi) + 0.5 * tail);
  const double f21 = -0.5 - nu / 2.0;
  const double f22 = fx + 0.5 * nu * tail;
  const double f23 = -nu * (0.5 - 0.5 * tail);
  return f21 + f22 + f23;
}

double psi1_radicand(double alpha, double nu) {
  return alpha * (1.0 + fbar2(nu)) - nu * (2.0 - alpha);
}

double psi1_radicand_dnu(double alpha, double nu) {
  return alpha * reluinj::erfc(std::sqrt(nu)) - 2.0;
}

double psi1(double alpha, double nu) {
  const double k = psi1_radicand(alpha, nu);
  if (k < 0.0) throw DomainError("psi1: negative radicand");
  return -1.0 + std::sqrt(k);
}

double dpsi1_dnu(double alpha, double nu) {
  const double k = psi1_radicand(alpha, nu);
  if (!(k > 0.0)) throw DomainError("dpsi1_dnu: radicand must be positive");
  return psi1_radicand_dnu(alpha, nu) / (2.0 * std::sqrt(k));
}

double dpsi1_dalpha(double alpha, double nu) {
  const double k = psi1_radicand(alpha, nu);
  if (!(k > 0.0)) throw DomainError("dpsi1_dalpha: radicand must be positive");
  return (1.0 + fbar2(nu) + nu) / (2.0 * std::sqrt(k));
}

double solve_nu1(double alpha) {
  auto g = [alpha](double nu) { return psi1_radicand_dnu(alpha, nu); };
  if (!(alpha > 2.0)) {
    throw BracketError("solve_nu1: no stationary nu in bracket (alpha must exceed 2)", g(0.0), g(5.0));
  }
  double lo = 1e-6;
  double hi = 5.0;
  // g is decreasing in nu; widen geometrically until it changes sign.
  double g_lo = g(lo);
  double g_hi = g(hi);
  for (int k = 0; k < 40 && g_lo * g_hi > 0.0; ++k) {
    if (g_lo < 0.0) {
      lo *= 1e-2;
      if (lo < 1e-300) break;
      g_lo = g(lo);
    } else {
      hi *= 2.0;
      g_hi = g(hi);
    }
  }
  if (g_lo * g_hi > 0.0) {
    throw BracketError("solve_nu1: no stationary nu in bracket (alpha must exceed 2)", g_lo, g_hi);
  }
  std::uintmax_t max_iter = 200;
  auto tol = [](double a, double b) { return std::fabs(a - b) <= 4e-16 * std::fabs(a); };
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, tol, max_iter);
  return 0.5 * (a + b);
}

Level1Gammas gamma1(double alpha, double nu) {
  const double k = psi1_radicand(alpha, nu);
  if (k < 0.0) throw DomainError("gamma1: negative radicand");
  return {0.5, std::sqrt(k) / 2.0};
}

EvalResult evaluate_level1(const EvalPoint& point) {
  const double alpha = point.alpha;
  const double gq = point.aux.gamma_q;
  const double gp = point.aux.gamma_p;
  const double nu = point.aux.nu;
  if (!(gq > 0.0) || !(gp > 0.0) || !(nu >= 0.0)) {
    throw DomainError("evaluate_level1: requires gamma_q, gamma_p > 0 and nu >= 0");
  }
  const double k = psi1_radicand(alpha, nu);
  EvalResult out;
  out.psi = -gq - 1.0 / (4.0 * gq) + gp + k / (4.0 * gp);
  out.grad = {{"d/dgamma_q", -1.0 + 1.0 / (4.0 * gq * gq)},
              {"d/dgamma_p", 1.0 - k / (4.0 * gp * gp)},
              {"d/dnu", psi1_radicand_dnu(alpha, nu) / (4.0 * gp)}};
  return out;
}

}  // namespace reluinj
