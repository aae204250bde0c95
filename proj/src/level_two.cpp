#include "reluinj/level_two.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "reluinj/errors.hpp"
#include "reluinj/gaussian.hpp"
#include "reluinj/kernels.hpp"

namespace reluinj {
namespace {

void require_level2(const EvalPoint& point) {
  const auto violations = validate(point);
  if (!violations.empty()) {
    throw std::invalid_argument("invalid level-2 point: " + violations.front().field + " " +
                                violations.front().message);
  }
  if (point.lifting.r != 2) throw std::invalid_argument("level-2 evaluator needs r = 2");
  if (point.lifting.p2() >= 1.0 - 1e-10) throw DomainError("level 2: p2 too close to 1");
}

struct Level2Core {
  double psi = 0.0;
  double dalpha = 0.0;
  // c2, p2, q2, gamma_q, gamma_p, nu
  std::array<double, 6> grad{};
};

Level2Core level2_core(const EvalPoint& point, const QuadConfig& cfg, bool with_grad) {
  require_level2(point);
  const double alpha = point.alpha;
  const double p2 = point.lifting.p2();
  const double q2 = point.lifting.q2();
  const double c2 = point.lifting.c2();
  const double gq = point.aux.gamma_q;
  const double gp = point.aux.gamma_p;
  const double nu = point.aux.nu;
  if (with_grad && !(p2 > 0.0)) throw DomainError("grad_psi2: p2-derivative needs p2 > 0");

  const SphereSide sphere = sphere_side_level2(c2, q2, gq);
  const QuadRule& rule = cached_gauss_hermite(cfg.nodes_single);
  const double A = std::sqrt(1.0 - p2);
  const double root_p2 = std::sqrt(p2);
  const double C = c2 / (4.0 * gp);

  double e_log = 0.0;
  double e_c = 0.0;
  double e_nu = 0.0;
  double e_p2 = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u3 = rule.nodes[i];
    const double w = rule.weights[i];
    const FhatTerms f = fhat_terms(A, u3 * root_p2, C, nu);
    if (!std::isfinite(f.log_value)) throw EvaluationError("level 2: non-finite log fhat", u3);
    e_log += w * f.log_value;
    if (with_grad) {
      e_c += w * f.dlog_C;
      e_nu += w * f.dlog_nu;
      e_p2 += w * (f.dlog_A * (-0.5 / A) + f.dlog_B * u3 * 0.5 / root_p2);
    }
  }

  Level2Core out;
  out.psi = 0.5 * (1.0 - p2 * q2) * c2 - gq - sphere.value + gp - nu * (2.0 - alpha) / (4.0 * gp) -
            alpha / c2 * e_log;
  out.dalpha = nu / (4.0 * gp) - e_log / c2;
  if (with_grad) {
    out.grad[0] = 0.5 * (1.0 - p2 * q2) - sphere.d_c2 + alpha / (c2 * c2) * e_log -
                  alpha / c2 * e_c / (4.0 * gp);
    out.grad[1] = -0.5 * q2 * c2 - alpha / c2 * e_p2;
    out.grad[2] = -0.5 * p2 * c2 - sphere.d_q2;
    out.grad[3] = -1.0 - sphere.d_gamma_q;
    out.grad[4] = 1.0 + nu * (2.0 - alpha) / (4.0 * gp * gp) + alpha / (4.0 * gp * gp) * e_c;
    out.grad[5] = -(2.0 - alpha) / (4.0 * gp) - alpha / c2 * e_nu;
  }
  return out;
}

const std::array<const char*, 6> kLevel2Names = {"d/dc2",      "d/dp2",      "d/dq2",
                                                 "d/dgamma_q", "d/dgamma_p", "d/dnu"};

// log f-tilde of the partial lifting, e^{C nu} factored out.
double log_ftilde(double C, double nu) {
  const double a = std::sqrt(2.0 * nu);
  const double widen = std::sqrt(1.0 + 2.0 * C);
  const double f21 = 0.5;
  const double f22 = std::exp(-2.0 * C * nu) * 0.5 * reluinj::erfc(a / kSqrt2);
  const double f23 = (0.5 - 0.5 * reluinj::erfc(a * widen / kSqrt2)) / widen;
  return C * nu + std::log(f21 + f22 + f23);
}

}  // namespace

double gamma_q_partial(double c2) { return (c2 + std::sqrt(c2 * c2 + 4.0)) / 4.0; }

double psi2_partial(double alpha, double c2, double gamma_p, double nu) {
  if (!(c2 > 0.0) || !(gamma_p > 0.0) || !(nu >= 0.0)) {
    throw DomainError("psi2_partial: requires c2 > 0, gamma_p > 0, nu >= 0");
  }
  const double gq = gamma_q_partial(c2);
  const double log_arg = (2.0 * gq - c2) / (2.0 * gq);
  if (!(log_arg > 0.0)) throw DomainError("psi2_partial: nonpositive log argument");
  const double lf = log_ftilde(c2 / (4.0 * gamma_p), nu);
  if (!std::isfinite(lf)) throw DomainError("psi2_partial: nonpositive f-tilde");
  return 0.5 * c2 - gq + std::log(log_arg) / (2.0 * c2) + gamma_p -
         nu * (2.0 - alpha) / (4.0 * gamma_p) - alpha / c2 * lf;
}

std::vector<Residual> grad_psi2_partial(double alpha, double c2, double gamma_p, double nu) {
  EvalPoint point{alpha, LiftingParams::level2(0.0, 0.0, c2), {gamma_q_partial(c2), gamma_p, nu}};
  auto full = evaluate_level2_partial(point).grad;
  // gamma_q sits at its stationary value, so its residual is dropped.
  return {full[0], full[2], full[3]};
}

double dpsi2_partial_dalpha(double, double c2, double gamma_p, double nu) {
  return nu / (4.0 * gamma_p) - log_ftilde(c2 / (4.0 * gamma_p), nu) / c2;
}

EvalResult evaluate_level2_partial(const EvalPoint& point) {
  if (point.lifting.r != 2 || point.lifting.p2() != 0.0 || point.lifting.q2() != 0.0) {
    throw std::invalid_argument("partial lifting needs r = 2 with p2 = q2 = 0");
  }
  const double alpha = point.alpha;
  const double c2 = point.lifting.c2();
  const double gq = point.aux.gamma_q;
  const double gp = point.aux.gamma_p;
  const double nu = point.aux.nu;
  if (!(c2 > 0.0) || !(gp > 0.0) || !(nu >= 0.0)) {
    throw DomainError("evaluate_level2_partial: requires c2 > 0, gamma_p > 0, nu >= 0");
  }
  const SphereSide sphere = sphere_side_level2(c2, 0.0, gq);
  const double C = c2 / (4.0 * gp);
  const FhatTerms f = fhat_terms(1.0, 0.0, C, nu);
  EvalResult out;
  out.psi = 0.5 * c2 - gq - sphere.value + gp - nu * (2.0 - alpha) / (4.0 * gp) -
            alpha / c2 * f.log_value;
  out.grad = {
      {"d/dc2", 0.5 - sphere.d_c2 + alpha / (c2 * c2) * f.log_value - alpha / c2 * f.dlog_C / (4.0 * gp)},
      {"d/dgamma_q", -1.0 - sphere.d_gamma_q},
      {"d/dgamma_p", 1.0 + nu * (2.0 - alpha) / (4.0 * gp * gp) + alpha / (4.0 * gp * gp) * f.dlog_C},
      {"d/dnu", -(2.0 - alpha) / (4.0 * gp) - alpha / c2 * f.dlog_nu}};
  return out;
}

double fhat2_level2(double u3, double p2, double c2, double gamma_p, double nu) {
  if (!(p2 >= 0.0) || p2 >= 1.0 - 1e-10) throw DomainError("fhat2_level2: p2 must lie in [0, 1)");
  if (!(c2 > 0.0) || !(gamma_p > 0.0)) throw DomainError("fhat2_level2: c2, gamma_p must be positive");
  const FhatTerms f = fhat_terms(std::sqrt(1.0 - p2), u3 * std::sqrt(p2), c2 / (4.0 * gamma_p), nu);
  return std::exp(f.log_value);
}

EvalResult psi2_full(const EvalPoint& point, const QuadConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult out;
  out.psi = level2_core(point, cfg, false).psi;
  out.diagnostics.nodes_inner = cfg.nodes_single;
  out.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<Residual> grad_psi2(const EvalPoint& point, const QuadConfig& cfg) {
  return evaluate_level2(point, cfg).grad;
}

EvalResult evaluate_level2(const EvalPoint& point, const QuadConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Level2Core core = level2_core(point, cfg, true);
  EvalResult out;
  out.psi = core.psi;
  for (std::size_t k = 0; k < kLevel2Names.size(); ++k) {
    if (!std::isfinite(core.grad[k])) throw EvaluationError("level 2: non-finite residual", 0.0);
    out.grad.push_back({kLevel2Names[k], core.grad[k]});
  }
  out.diagnostics.nodes_inner = cfg.nodes_single;
  out.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double dpsi2_dalpha(const EvalPoint& point, const QuadConfig& cfg) {
  return level2_core(point, cfg, false).dalpha;
}

ClosedForm2 closed_form_r2(double p2, double q2) {
  if (!(q2 > 0.0) || !(p2 > 0.0) || !(p2 < 1.0) || !(q2 < 1.0)) {
    throw DomainError("closed_form_r2: singular input (needs 0 < p2, q2 < 1)");
  }
  const double ratio = std::sqrt(p2 / q2);
  ClosedForm2 out;
  out.gamma_q = 0.5 * (1.0 - q2) / (1.0 - p2) * ratio;
  out.c2 = ratio / (1.0 - p2) - 1.0 / ((1.0 - q2) * ratio);
  out.gamma_p = 1.0 / (4.0 * out.gamma_q);
  return out;
}

}  // namespace reluinj
