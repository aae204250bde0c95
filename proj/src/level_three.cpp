#include "reluinj/level_three.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reluinj/errors.hpp"
#include "reluinj/gaussian.hpp"
#include "reluinj/kernels.hpp"

namespace reluinj {
namespace {

void require_level3(const EvalPoint& point) {
  const auto violations = validate(point);
  if (!violations.empty()) {
    throw std::invalid_argument("invalid level-3 point: " + violations.front().field + " " +
                                violations.front().message);
  }
  if (point.lifting.r != 3) throw std::invalid_argument("level-3 evaluator needs r = 3");
  if (point.lifting.p2() >= 1.0 - 1e-10) throw DomainError("level 3: p2 too close to 1");
}

struct Level3Core {
  double psi = 0.0;
  double dalpha = 0.0;
  // c2, c3, p2, p3, q2, q3, gamma_q, gamma_p, nu
  std::array<double, 9> grad{};
};

Level3Core level3_core(const EvalPoint& point, const QuadConfig& cfg, bool with_grad) {
  require_level3(point);
  const double alpha = point.alpha;
  const double p2 = point.lifting.p2();
  const double p3 = point.lifting.p3();
  const double q2 = point.lifting.q2();
  const double q3 = point.lifting.q3();
  const double c2 = point.lifting.c2();
  const double c3 = point.lifting.c3();
  const double gq = point.aux.gamma_q;
  const double gp = point.aux.gamma_p;
  const double nu = point.aux.nu;

  const double b3 = std::sqrt(p2 - p3);
  const double b4 = std::sqrt(p3);
  if (with_grad && !(b3 > 0.0 && b4 > 0.0)) {
    throw DomainError("grad_psi3: p-derivatives need 0 < p3 < p2");
  }

  const SphereSide sphere = sphere_side_level3(c2, c3, q2, q3, gq);
  const QuadRule& inner = cached_gauss_hermite(cfg.nodes_inner);
  const QuadRule& outer = cached_gauss_hermite(cfg.nodes_outer);
  const double A = std::sqrt(1.0 - p2);
  const double C = c2 / (4.0 * gp);
  const double rho = c3 / c2;

  std::vector<FhatTerms> column(inner.size());
  std::vector<double> log_terms(inner.size());

  double e_log_w = 0.0;   // E_u4 log W
  double e_c = 0.0;       // E_u4 <dlog_C>
  double e_nu = 0.0;      // E_u4 <dlog_nu>
  double e_log_f = 0.0;   // E_u4 <log fhat>
  double e_p2 = 0.0;      // E_u4 <d log fhat / dp2>
  double e_p3 = 0.0;      // E_u4 <d log fhat / dp3>
  for (std::size_t j = 0; j < outer.size(); ++j) {
    const double u4 = outer.nodes[j];
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inner.size(); ++i) {
      const double u3 = inner.nodes[i];
      column[i] = fhat_terms(A, u3 * b3 + u4 * b4, C, nu);
      if (!std::isfinite(column[i].log_value)) {
        throw EvaluationError("level 3: non-finite log fhat", u3);
      }
      log_terms[i] = std::log(inner.weights[i]) + rho * column[i].log_value;
      peak = std::max(peak, log_terms[i]);
    }
    double mass = 0.0;
    for (double t : log_terms) mass += std::exp(t - peak);
    const double log_w = peak + std::log(mass);
    e_log_w += outer.weights[j] * log_w;
    if (!with_grad) continue;

    // Tilted weights pi_i = w_i fhat_i^rho / W.
    double m_c = 0.0, m_nu = 0.0, m_log = 0.0, m_p2 = 0.0, m_p3 = 0.0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      const double pi = std::exp(log_terms[i] - log_w);
      const FhatTerms& f = column[i];
      const double u3 = inner.nodes[i];
      m_c += pi * f.dlog_C;
      m_nu += pi * f.dlog_nu;
      m_log += pi * f.log_value;
      m_p2 += pi * (f.dlog_A * (-0.5 / A) + f.dlog_B * u3 * 0.5 / b3);
      m_p3 += pi * f.dlog_B * (-u3 * 0.5 / b3 + u4 * 0.5 / b4);
    }
    const double wj = outer.weights[j];
    e_c += wj * m_c;
    e_nu += wj * m_nu;
    e_log_f += wj * m_log;
    e_p2 += wj * m_p2;
    e_p3 += wj * m_p3;
  }

  Level3Core out;
  const double pside = -alpha / c3 * e_log_w;
  out.psi = 0.5 * (1.0 - p2 * q2) * c2 + 0.5 * (p2 * q2 - p3 * q3) * c3 - gq - sphere.value + gp -
            nu * (2.0 - alpha) / (4.0 * gp) + pside;
  out.dalpha = nu / (4.0 * gp) - e_log_w / c3;
  if (with_grad) {
    // d(E log W)/dtheta = rho * <dlog fhat/dtheta> for theta inside fhat, <log fhat> for rho.
    const double k = alpha / c3;
    out.grad[0] = 0.5 * (1.0 - p2 * q2) - sphere.d_c2 -
                  k * (rho * e_c / (4.0 * gp) - e_log_f * c3 / (c2 * c2));
    out.grad[1] = 0.5 * (p2 * q2 - p3 * q3) - sphere.d_c3 + alpha / (c3 * c3) * e_log_w -
                  k * e_log_f / c2;
    out.grad[2] = -0.5 * q2 * c2 + 0.5 * q2 * c3 - k * rho * e_p2;
    out.grad[3] = -0.5 * q3 * c3 - k * rho * e_p3;
    out.grad[4] = -0.5 * p2 * c2 + 0.5 * p2 * c3 - sphere.d_q2;
    out.grad[5] = -0.5 * p3 * c3 - sphere.d_q3;
    out.grad[6] = -1.0 - sphere.d_gamma_q;
    out.grad[7] = 1.0 + nu * (2.0 - alpha) / (4.0 * gp * gp) + k * rho * e_c * c2 / (4.0 * gp * gp);
    out.grad[8] = -(2.0 - alpha) / (4.0 * gp) - k * rho * e_nu;
  }
  return out;
}

const std::array<const char*, 9> kLevel3Names = {
    "d/dc2", "d/dc3", "d/dp2", "d/dp3", "d/dq2", "d/dq3", "d/dgamma_q", "d/dgamma_p", "d/dnu"};

}  // namespace

double fhat2_level3(double u3, double u4, double p2, double p3, double c2, double gamma_p,
                    double nu) {
  if (!(p3 >= 0.0) || p3 > p2) throw DomainError("fhat2_level3: ordering violation, need 0 <= p3 <= p2");
  if (p2 >= 1.0 - 1e-10) throw DomainError("fhat2_level3: p2 must be below 1");
  if (!(c2 > 0.0) || !(gamma_p > 0.0)) throw DomainError("fhat2_level3: c2, gamma_p must be positive");
  const double B = u3 * std::sqrt(p2 - p3) + u4 * std::sqrt(p3);
  return std::exp(fhat_terms(std::sqrt(1.0 - p2), B, c2 / (4.0 * gamma_p), nu).log_value);
}

EvalResult psi3_full(const EvalPoint& point, const QuadConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult out;
  out.psi = level3_core(point, cfg, false).psi;
  out.diagnostics.nodes_inner = cfg.nodes_inner;
  out.diagnostics.nodes_outer = cfg.nodes_outer;
  out.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<Residual> grad_psi3(const EvalPoint& point, const QuadConfig& cfg) {
  return evaluate_level3(point, cfg).grad;
}

EvalResult evaluate_level3(const EvalPoint& point, const QuadConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Level3Core core = level3_core(point, cfg, true);
  EvalResult out;
  out.psi = core.psi;
  for (std::size_t k = 0; k < kLevel3Names.size(); ++k) {
    if (!std::isfinite(core.grad[k])) throw EvaluationError("level 3: non-finite residual", 0.0);
    out.grad.push_back({kLevel3Names[k], core.grad[k]});
  }
  out.diagnostics.nodes_inner = cfg.nodes_inner;
  out.diagnostics.nodes_outer = cfg.nodes_outer;
  out.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double dpsi3_dalpha(const EvalPoint& point, const QuadConfig& cfg) {
  return level3_core(point, cfg, false).dalpha;
}

ClosedForm3 closed_form_r3(double p2, double p3, double q2, double q3) {
  if (!(0.0 < p3 && p3 < p2 && p2 < 1.0) || !(0.0 < q3 && q3 < q2 && q2 < 1.0)) {
    throw DomainError("closed_form_r3: singular input (needs 0 < p3 < p2 < 1, 0 < q3 < q2 < 1)");
  }
  const double dp = p2 - p3;
  const double dq = q2 - q3;
  const double root = std::sqrt(q3 / p3);
  ClosedForm3 out;
  out.gamma_q = 0.5 * (1.0 - q2) / (1.0 - p2) * (dp / dq) * root;
  out.c2 = (dp / dq) * root / (1.0 - p2) - (dq / dp) / (root * (1.0 - q2));
  out.c3 = 1.0 / (dp * root) - root / dq;
  out.gamma_p = 1.0 / (4.0 * out.gamma_q);
  return out;
}

}  // namespace reluinj
