#include "reluinj/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "reluinj/errors.hpp"
#include "reluinj/level_one.hpp"
#include "reluinj/level_three.hpp"
#include "reluinj/level_two.hpp"

namespace reluinj {
namespace {

using Vec = Eigen::VectorXd;
using System = std::function<Vec(const Vec&)>;

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec to_vec(const std::vector<Residual>& residuals) {
  Vec v(static_cast<Eigen::Index>(residuals.size()));
  for (std::size_t i = 0; i < residuals.size(); ++i) v[static_cast<Eigen::Index>(i)] = residuals[i].value;
  return v;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool try_eval(const System& f, const Vec& x, Vec& out) {
  try {
    out = f(x);
    return out.allFinite();
  } catch (const std::exception&) {
    return false;
  }
}

Eigen::MatrixXd fd_jacobian(const System& f, const Vec& x, const Vec& r0) {
  Eigen::MatrixXd jac(r0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(x[j]), 1e-2);
    Vec xp = x, xm = x, rp, rm;
    xp[j] += h;
    xm[j] -= h;
    const bool okp = try_eval(f, xp, rp);
    const bool okm = try_eval(f, xm, rm);
    if (okp && okm) {
      jac.col(j) = (rp - rm) / (2.0 * h);
    } else if (okp) {
      jac.col(j) = (rp - r0) / h;
    } else if (okm) {
      jac.col(j) = (r0 - rm) / h;
    } else {
      throw DomainError("jacobian: both difference directions leave the domain");
    }
  }
  return jac;
}

struct NewtonState {
  Vec x;
  Vec r;
  double norm = kInf;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton with a finite-difference Jacobian that is reused for up to three steps.
NewtonState newton(const System& f, const Vec& x0, const QuadConfig& cfg, double tol, int max_iters,
                   std::vector<std::string>* trace) {
  NewtonState s;
  s.x = x0;
  if (!try_eval(f, x0, s.r)) return s;
  s.norm = s.r.norm();
  Eigen::MatrixXd jac;
  int age = 3;
  for (int it = 0; it < max_iters; ++it) {
    if (s.norm < tol) break;
    bool accepted = false;
    double lambda = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (age >= 3) {
        try {
          jac = fd_jacobian(f, s.x, s.r);
        } catch (const std::exception&) {
          break;
        }
        age = 0;
      }
      const Vec dx = jac.colPivHouseholderQr().solve(-s.r);
      if (!dx.allFinite()) {
        age = 3;
        continue;
      }
      lambda = s.norm < 1e-2 ? 1.0 : cfg.damping;
      for (; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
        Vec rn;
        const Vec xn = s.x + lambda * dx;
        if (try_eval(f, xn, rn) && rn.norm() < (1.0 - 1e-4 * lambda) * s.norm) {
          s.x = xn;
          s.r = rn;
          s.norm = rn.norm();
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (age == 0) break;
        age = 3;
      }
    }
    s.iterations = it + 1;
    if (trace) {
      char line[128];
      std::snprintf(line, sizeof line, "iter %d |r| = %.3e step = %.4g%s", s.iterations, s.norm, lambda,
                    accepted ? "" : " (line search failed)");
      trace->emplace_back(line);
    }
    if (!accepted) break;
    ++age;
  }
  s.converged = s.norm < tol;
  return s;
}

QuadConfig coarse(const QuadConfig& cfg) {
  QuadConfig c = cfg;
  c.nodes_single = std::min(cfg.nodes_single, 24);
  c.nodes_inner = std::min(cfg.nodes_inner, 16);
  c.nodes_outer = std::min(cfg.nodes_outer, 16);
  return c;
}

// ---- reduced systems: closed-form relations eliminate gamma_q and the c's ----

EvalPoint reduced2_point(double alpha, const Vec& y) {
  const ClosedForm2 cf = closed_form_r2(y[0], y[1]);
  return {alpha, LiftingParams::level2(y[0], y[1], cf.c2), {cf.gamma_q, y[2], y[3]}};
}

Vec reduced2_residual(double alpha, const Vec& y, const QuadConfig& cfg) {
  const auto g = grad_psi2(reduced2_point(alpha, y), cfg);
  Vec r(4);
  r << g[0].value, g[1].value, g[4].value, g[5].value;
  return r;
}

EvalPoint reduced3_point(double alpha, const Vec& y) {
  const ClosedForm3 cf = closed_form_r3(y[0], y[1], y[2], y[3]);
  return {alpha, LiftingParams::level3(y[0], y[1], y[2], y[3], cf.c2, cf.c3), {cf.gamma_q, y[4], y[5]}};
}

Vec reduced3_residual(double alpha, const Vec& y, const QuadConfig& cfg) {
  const auto g = grad_psi3(reduced3_point(alpha, y), cfg);
  Vec r(6);
  r << g[0].value, g[1].value, g[2].value, g[3].value, g[7].value, g[8].value;
  return r;
}

// Solves the (gamma_p, nu) pair with the lifting parameters frozen; used to score scan cells.
template <class PointFn>
bool solve_multipliers(const PointFn& point_of, Level level, double& gp, double& nu, const QuadConfig& cfg) {
  const std::size_t n = variable_names(level).size();
  const System f = [&](const Vec& z) {
    const EvalPoint p = point_of(z[0], z[1]);
    const auto g = evaluate_full(level, p, cfg).grad;
    Vec r(2);
    r << g[n - 2].value, g[n - 1].value;
    return r;
  };
  Vec z(2);
  z << gp, nu;
  const NewtonState s = newton(f, z, cfg, 1e-9, 12, nullptr);
  if (!std::isfinite(s.norm)) return false;
  gp = s.x[0];
  nu = s.x[1];
  return true;
}

struct Candidate {
  Vec y;
  double score = kInf;
};

double score_reduced(const System& f, const Vec& y) {
  Vec r;
  return try_eval(f, y, r) ? r.norm() : kInf;
}

std::vector<Candidate> best_candidates(std::vector<Candidate> cands, std::size_t keep) {
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
  if (cands.size() > keep) cands.resize(keep);
  return cands;
}

Level1Gammas level1_guess(double alpha, double& nu) {
  try {
    nu = solve_nu1(alpha);
    return gamma1(alpha, nu);
  } catch (const std::exception&) {
    nu = 0.1;
    return {0.5, 0.5};
  }
}

std::vector<Candidate> cold_candidates2(double alpha, const QuadConfig& cfg) {
  const QuadConfig cc = coarse(cfg);
  const System f = [&](const Vec& y) { return reduced2_residual(alpha, y, cc); };
  std::vector<Candidate> cands;
  double nu1 = 0.1;
  const Level1Gammas g1 = level1_guess(alpha, nu1);

  auto add = [&](double p2, double q2, double gp, double nu) {
    try {
      const ClosedForm2 cf = closed_form_r2(p2, q2);
      if (!(cf.c2 > 0.0)) return;
      const auto point_of = [&](double a, double b) {
        return EvalPoint{alpha, LiftingParams::level2(p2, q2, cf.c2), {cf.gamma_q, a, b}};
      };
      if (!solve_multipliers(point_of, Level::R2Full, gp, nu, cc)) return;
      Vec y(4);
      y << p2, q2, gp, nu;
      cands.push_back({y, score_reduced(f, y)});
    } catch (const std::exception&) {
    }
  };
  // Small perturbation of the partial lifting, then a coarse grid over (p2, q2).
  add(0.05, 0.05 * 0.5, g1.gamma_p, nu1);
  for (int i = 0; i < 7; ++i) {
    const double p2 = 0.3 + 0.1 * i;
    for (int j = 1; j <= 8; ++j) {
      const double q2 = p2 * 0.1 * j;
      const ClosedForm2 cf = [&] {
        try {
          return closed_form_r2(p2, q2);
        } catch (const std::exception&) {
          return ClosedForm2{};
        }
      }();
      if (!(cf.gamma_q > 0.0)) continue;
      add(p2, q2, 1.0 / (4.0 * cf.gamma_q), nu1 / 4.0);
    }
  }
  return best_candidates(std::move(cands), 4);
}

std::vector<Candidate> cold_candidates3(double alpha, const EvalPoint& from2, const QuadConfig& cfg) {
  const QuadConfig cc = coarse(cfg);
  const System f = [&](const Vec& y) { return reduced3_residual(alpha, y, cc); };
  std::vector<Candidate> cands;
  const double p2l = from2.lifting.p2();
  const double q2l = from2.lifting.q2();

  auto add = [&](double p2, double p3, double q2, double q3, double gp, double nu) {
    try {
      const ClosedForm3 cf = closed_form_r3(p2, p3, q2, q3);
      if (!(cf.c2 > 0.0) || !(cf.c3 > 0.0)) return;
      const auto point_of = [&](double a, double b) {
        return EvalPoint{alpha, LiftingParams::level3(p2, p3, q2, q3, cf.c2, cf.c3), {cf.gamma_q, a, b}};
      };
      if (!solve_multipliers(point_of, Level::R3, gp, nu, cc)) return;
      Vec y(6);
      y << p2, p3, q2, q3, gp, nu;
      cands.push_back({y, score_reduced(f, y)});
    } catch (const std::exception&) {
    }
  };
  const double gp2 = from2.aux.gamma_p;
  const double nu2 = from2.aux.nu;
  // Collapse point: the level-2 solution split by a small gap.
  constexpr double eps = 0.05;
  if (p2l - eps > 0.0 && q2l - eps > 0.0) add(p2l, p2l - eps, q2l, q2l - eps, gp2, nu2);
  // The level-2 solution as the deepest layer, with a grid over the new top layer.
  for (int i = 1; i <= 6; ++i) {
    const double p2 = p2l + (1.0 - p2l) * (i / 7.0);
    for (int j = 1; j <= 6; ++j) {
      const double q2 = q2l + (1.0 - q2l) * (j / 8.0);
      add(p2, p2l, q2, q2l, gp2 * 0.7, nu2 * 0.7);
    }
  }
  return best_candidates(std::move(cands), 4);
}

SolveReport finish(Level level, const EvalPoint& point, int iterations, std::vector<std::string> trace,
                   const QuadConfig& cfg) {
  SolveReport rep;
  rep.point = point;
  rep.iterations = iterations;
  rep.trace = std::move(trace);
  try {
    const EvalResult ev = evaluate_full(level, point, cfg);
    rep.psi = ev.psi;
    rep.residuals = ev.grad;
    rep.residual_norm = ev.residual_norm();
  } catch (const std::exception&) {
    rep.psi = std::numeric_limits<double>::quiet_NaN();
    rep.residual_norm = kInf;
  }
  rep.converged = rep.residual_norm < cfg.grad_tol;
  return rep;
}

// Newton on every variable of the level, starting from a reduced solution.
SolveReport polish(Level level, double alpha, const EvalPoint& start, int prior_iters,
                   std::vector<std::string> trace, const QuadConfig& cfg) {
  const System f = [&](const Vec& x) {
    return to_vec(evaluate_full(level, unpack_variables(level, alpha, to_std(x)), cfg).grad);
  };
  trace.emplace_back("polish on the full system");
  const NewtonState s = newton(f, from_std(pack_variables(level, start)), cfg, cfg.grad_tol * 0.1,
                               cfg.max_iters, &trace);
  EvalPoint point = start;
  if (std::isfinite(s.norm)) point = unpack_variables(level, alpha, to_std(s.x));
  return finish(level, point, prior_iters + s.iterations, std::move(trace), cfg);
}

SolveReport solve_level1(double alpha, const QuadConfig& cfg) {
  const double nu = solve_nu1(alpha);
  const Level1Gammas g = gamma1(alpha, nu);
  EvalPoint point{alpha, LiftingParams::level1(), {g.gamma_q, g.gamma_p, nu}};
  return finish(Level::R1, point, 1, {"level 1: bracketed root in nu"}, cfg);
}

SolveReport solve_partial(double alpha, const std::optional<EvalPoint>& init, const QuadConfig& cfg) {
  const System f = [&](const Vec& y) { return to_vec(grad_psi2_partial(alpha, y[0], y[1], y[2])); };
  std::vector<Vec> starts;
  if (init) {
    Vec y(3);
    y << init->lifting.c2(), init->aux.gamma_p, init->aux.nu;
    starts.push_back(y);
  }
  double nu1 = 0.1;
  const Level1Gammas g1 = level1_guess(alpha, nu1);
  for (double c2 : {0.5, 1.0, 2.0, 0.25, 4.0}) {
    Vec y(3);
    y << c2, g1.gamma_p, nu1;
    starts.push_back(y);
  }
  std::vector<std::string> trace;
  NewtonState best;
  for (const Vec& y0 : starts) {
    trace.emplace_back("reduced start c2 = " + std::to_string(y0[0]));
    NewtonState s = newton(f, y0, cfg, cfg.grad_tol * 0.1, cfg.max_iters, &trace);
    if (s.norm < best.norm) best = s;
    if (s.converged) break;
  }
  if (!std::isfinite(best.norm)) {
    SolveReport rep;
    rep.point = {alpha, LiftingParams::level2(0.0, 0.0, starts.back()[0]), {}};
    rep.residual_norm = kInf;
    rep.psi = std::numeric_limits<double>::quiet_NaN();
    rep.trace = std::move(trace);
    return rep;
  }
  EvalPoint point{alpha, LiftingParams::level2(0.0, 0.0, best.x[0]),
                  {gamma_q_partial(best.x[0]), best.x[1], best.x[2]}};
  return polish(Level::R2Partial, alpha, point, best.iterations, std::move(trace), cfg);
}

SolveReport solve_full2(double alpha, const std::optional<EvalPoint>& init, const QuadConfig& cfg) {
  const System f = [&](const Vec& y) { return reduced2_residual(alpha, y, cfg); };
  std::vector<std::string> trace;
  NewtonState best;
  auto attempt = [&](const Vec& y0, const char* label) {
    trace.emplace_back(label);
    NewtonState s = newton(f, y0, cfg, cfg.grad_tol * 0.1, cfg.max_iters, &trace);
    if (s.norm < best.norm) best = s;
    return s.converged;
  };
  bool done = false;
  if (init && init->lifting.r == 2 && init->lifting.p2() > 0.0 && init->lifting.q2() > 0.0) {
    Vec y(4);
    y << init->lifting.p2(), init->lifting.q2(), init->aux.gamma_p, init->aux.nu;
    done = attempt(y, "reduced newton from supplied point");
  }
  if (!done) {
    for (const Candidate& c : cold_candidates2(alpha, cfg)) {
      if (attempt(c.y, "reduced newton from scan cell")) break;
    }
  }
  if (!std::isfinite(best.norm)) {
    SolveReport rep;
    rep.point = init.value_or(EvalPoint{alpha, LiftingParams::level2(0.5, 0.1, 1.0), {}});
    rep.point.alpha = alpha;
    rep.residual_norm = kInf;
    rep.psi = std::numeric_limits<double>::quiet_NaN();
    rep.trace = std::move(trace);
    return rep;
  }
  return polish(Level::R2Full, alpha, reduced2_point(alpha, best.x), best.iterations, std::move(trace), cfg);
}

SolveReport solve_full3(double alpha, const std::optional<EvalPoint>& init, const QuadConfig& cfg) {
  const System f = [&](const Vec& y) { return reduced3_residual(alpha, y, cfg); };
  std::vector<std::string> trace;
  NewtonState best;
  auto attempt = [&](const Vec& y0, const char* label) {
    trace.emplace_back(label);
    NewtonState s = newton(f, y0, cfg, cfg.grad_tol * 0.1, cfg.max_iters, &trace);
    if (s.norm < best.norm) best = s;
    return s.converged;
  };
  bool done = false;
  std::optional<EvalPoint> from2;
  if (init && init->lifting.r == 3) {
    const auto& l = init->lifting;
    Vec y(6);
    y << l.p2(), l.p3(), l.q2(), l.q3(), init->aux.gamma_p, init->aux.nu;
    done = attempt(y, "reduced newton from supplied point");
  } else if (init && init->lifting.r == 2) {
    from2 = *init;
  }
  if (!done) {
    if (!from2) {
      const SolveReport two = solve_full2(alpha, std::nullopt, cfg);
      if (two.converged) from2 = two.point;
    }
    if (from2) {
      for (const Candidate& c : cold_candidates3(alpha, *from2, cfg)) {
        if (attempt(c.y, "reduced newton from collapse/scan cell")) break;
      }
    }
  }
  if (!std::isfinite(best.norm)) {
    SolveReport rep;
    rep.point = EvalPoint{alpha, LiftingParams::level3(0.9, 0.7, 0.4, 0.2, 10.0, 5.0), {}};
    rep.residual_norm = kInf;
    rep.psi = std::numeric_limits<double>::quiet_NaN();
    rep.trace = std::move(trace);
    return rep;
  }
  return polish(Level::R3, alpha, reduced3_point(alpha, best.x), best.iterations, std::move(trace), cfg);
}

}  // namespace

std::vector<std::string> variable_names(Level level) {
  switch (level) {
    case Level::R1:
      return {"gamma_q", "gamma_p", "nu"};
    case Level::R2Partial:
      return {"c2", "gamma_q", "gamma_p", "nu"};
    case Level::R2Full:
      return {"c2", "p2", "q2", "gamma_q", "gamma_p", "nu"};
    case Level::R3:
      return {"c2", "c3", "p2", "p3", "q2", "q3", "gamma_q", "gamma_p", "nu"};
  }
  return {};
}

std::vector<double> pack_variables(Level level, const EvalPoint& point) {
  const auto& l = point.lifting;
  const auto& a = point.aux;
  switch (level) {
    case Level::R1:
      return {a.gamma_q, a.gamma_p, a.nu};
    case Level::R2Partial:
      return {l.c2(), a.gamma_q, a.gamma_p, a.nu};
    case Level::R2Full:
      return {l.c2(), l.p2(), l.q2(), a.gamma_q, a.gamma_p, a.nu};
    case Level::R3:
      return {l.c2(), l.c3(), l.p2(), l.p3(), l.q2(), l.q3(), a.gamma_q, a.gamma_p, a.nu};
  }
  return {};
}

EvalPoint unpack_variables(Level level, double alpha, const std::vector<double>& v) {
  if (v.size() != variable_names(level).size()) {
    throw std::invalid_argument("unpack_variables: wrong number of values for level " +
                                std::string(level_name(level)));
  }
  switch (level) {
    case Level::R1:
      return {alpha, LiftingParams::level1(), {v[0], v[1], v[2]}};
    case Level::R2Partial:
      return {alpha, LiftingParams::level2(0.0, 0.0, v[0]), {v[1], v[2], v[3]}};
    case Level::R2Full:
      return {alpha, LiftingParams::level2(v[1], v[2], v[0]), {v[3], v[4], v[5]}};
    case Level::R3:
      return {alpha, LiftingParams::level3(v[2], v[3], v[4], v[5], v[0], v[1]), {v[6], v[7], v[8]}};
  }
  return {};
}

EvalResult evaluate_full(Level level, const EvalPoint& point, const QuadConfig& cfg) {
  switch (level) {
    case Level::R1:
      return evaluate_level1(point);
    case Level::R2Partial:
      return evaluate_level2_partial(point);
    case Level::R2Full:
      return evaluate_level2(point, cfg);
    case Level::R3:
      return evaluate_level3(point, cfg);
  }
  throw std::invalid_argument("evaluate_full: unknown level");
}

double psi_value(Level level, const EvalPoint& point, const QuadConfig& cfg) {
  switch (level) {
    case Level::R1:
    case Level::R2Partial:
      return evaluate_full(level, point, cfg).psi;
    case Level::R2Full:
      return psi2_full(point, cfg).psi;
    case Level::R3:
      return psi3_full(point, cfg).psi;
  }
  throw std::invalid_argument("psi_value: unknown level");
}

double dpsi_dalpha(Level level, const EvalPoint& point, const QuadConfig& cfg) {
  const double nu = point.aux.nu;
  const double gp = point.aux.gamma_p;
  switch (level) {
    case Level::R1:
      return (1.0 + fbar2(nu) + nu) / (4.0 * gp);
    case Level::R2Partial:
      return dpsi2_partial_dalpha(point.alpha, point.lifting.c2(), gp, nu);
    case Level::R2Full:
      return dpsi2_dalpha(point, cfg);
    case Level::R3:
      return dpsi3_dalpha(point, cfg);
  }
  throw std::invalid_argument("dpsi_dalpha: unknown level");
}

SolveReport solve_stationary(Level level, double alpha, const std::optional<EvalPoint>& init,
                             const QuadConfig& cfg) {
  if (!(alpha > 0.0)) throw std::invalid_argument("solve_stationary: alpha must be positive");
  switch (level) {
    case Level::R1:
      return solve_level1(alpha, cfg);
    case Level::R2Partial:
      return solve_partial(alpha, init, cfg);
    case Level::R2Full:
      return solve_full2(alpha, init, cfg);
    case Level::R3:
      return solve_full3(alpha, init, cfg);
  }
  throw std::invalid_argument("solve_stationary: unknown level");
}

CapacityResult capacity(Level level, const QuadConfig& cfg, const EvalPoint& seed) {
  const double lo_bound = cfg.alpha_bracket.first;
  const double hi_bound = cfg.alpha_bracket.second;
  if (!(lo_bound > 0.0) || !(lo_bound < hi_bound)) throw std::invalid_argument("capacity: invalid alpha bracket");

  CapacityResult out;
  out.level = level;
  double alpha = std::clamp(seed.alpha, lo_bound, hi_bound);
  std::optional<EvalPoint> warm = seed;
  double lo = lo_bound, hi = hi_bound;
  bool have_lo = false, have_hi = false;
  std::optional<SolveReport> last_good;
  double last_good_alpha = alpha;

  auto endpoint_psi = [&](double a) {
    try {
      const SolveReport r = solve_stationary(level, a, warm, cfg);
      return r.converged ? r.psi : std::numeric_limits<double>::quiet_NaN();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  for (int it = 0; it < cfg.max_iters; ++it) {
    out.iterations = it + 1;
    SolveReport rep = solve_stationary(level, alpha, warm, cfg);
    if (!rep.converged && warm) rep = solve_stationary(level, alpha, std::nullopt, cfg);
    if (!rep.converged) {
      if (!last_good) break;
      alpha = 0.5 * (alpha + last_good_alpha);
      continue;
    }
    out.bracket_history.push_back({alpha, rep.psi});
    last_good = rep;
    last_good_alpha = alpha;
    warm = rep.point;
    if (rep.psi < 0.0) {
      lo = alpha;
      have_lo = true;
    } else {
      hi = alpha;
      have_hi = true;
    }
    if (std::abs(rep.psi) < cfg.psi_tol * 1e-4) break;

    double next = alpha - rep.psi / dpsi_dalpha(level, rep.point, cfg);
    if (have_lo && have_hi) {
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (hi - lo < 1e-13 * hi) break;
    } else {
      next = std::clamp(next, lo_bound, hi_bound);
      if (next == alpha) {
        // The iterate is pinned at a bracket end without a sign change.
        const double other = alpha == hi_bound ? lo_bound : hi_bound;
        const double other_psi = endpoint_psi(other);
        const double psi_lo = alpha == lo_bound ? rep.psi : other_psi;
        const double psi_hi = alpha == hi_bound ? rep.psi : other_psi;
        throw BracketError("capacity: no sign change of psi over the alpha bracket", psi_lo, psi_hi);
      }
    }
    if (std::abs(next - alpha) < 1e-13 * alpha) break;
    alpha = next;
  }
  if (!last_good) {
    throw BracketError("capacity: no stationary point found inside the alpha bracket",
                       std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
  }
  out.alpha_star = last_good_alpha;
  out.point = last_good->point;
  out.psi_residual = last_good->psi;
  out.grad_residual_norm = last_good->residual_norm;
  out.converged = std::abs(out.psi_residual) < cfg.psi_tol && last_good->converged;
  return out;
}

std::vector<CapacityResult> capacity_ladder(Level top, const QuadConfig& cfg) {
  std::vector<CapacityResult> out;
  const double mid = 0.5 * (cfg.alpha_bracket.first + cfg.alpha_bracket.second);
  out.push_back(capacity(Level::R1, cfg, EvalPoint{mid, LiftingParams::level1(), {}}));
  if (top == Level::R1) return out;

  EvalPoint seed2p = out.back().point;
  seed2p.lifting = LiftingParams::level2(0.0, 0.0, 0.5);
  seed2p.alpha = out.back().alpha_star;
  out.push_back(capacity(Level::R2Partial, cfg, seed2p));
  if (top == Level::R2Partial) return out;

  // The partial solution only fixes the starting alpha; the full level starts from its scan.
  const double alpha2 = out.back().alpha_star;
  const SolveReport cold2 = solve_stationary(Level::R2Full, alpha2, std::nullopt, cfg);
  if (!cold2.converged) throw std::runtime_error("capacity ladder: level-2 cold start did not converge");
  out.push_back(capacity(Level::R2Full, cfg, cold2.point));
  if (top == Level::R2Full) return out;

  const EvalPoint two = out.back().point;
  const SolveReport cold3 = solve_stationary(Level::R3, two.alpha, two, cfg);
  if (!cold3.converged) throw std::runtime_error("capacity ladder: level-3 start did not converge");
  out.push_back(capacity(Level::R3, cfg, cold3.point));
  return out;
}

CapacityResult capacity(Level level, const QuadConfig& cfg) { return capacity_ladder(level, cfg).back(); }

FdGradient fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                       const std::vector<double>& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  FdGradient out;
  out.values.resize(x.size());
  out.one_sided.assign(x.size(), false);
  auto eval = [&](const std::vector<double>& at, double& v) {
    try {
      v = f(at);
      return std::isfinite(v);
    } catch (const std::exception&) {
      return false;
    }
  };
  double f0 = 0.0;
  bool have_f0 = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    double fp = 0.0, fm = 0.0;
    const bool okp = eval(xp, fp);
    const bool okm = eval(xm, fm);
    if (okp && okm) {
      out.values[i] = (fp - fm) / (2.0 * step);
      continue;
    }
    if (!have_f0) {
      if (!eval(x, f0)) throw DomainError("fd_gradient: function not evaluable at the base point");
      have_f0 = true;
    }
    if (okp) {
      out.values[i] = (fp - f0) / step;
    } else if (okm) {
      out.values[i] = (f0 - fm) / step;
    } else {
      throw DomainError("fd_gradient: coordinate " + std::to_string(i) + " leaves the domain on both sides");
    }
    out.one_sided[i] = true;
  }
  return out;
}

std::vector<SolveReport> sweep(Level level, const std::vector<double>& alphas, const QuadConfig& cfg) {
  if (!std::is_sorted(alphas.begin(), alphas.end())) throw std::invalid_argument("sweep: alphas must be sorted");
  std::vector<SolveReport> out;
  std::optional<EvalPoint> warm;
  for (double alpha : alphas) {
    SolveReport rep;
    try {
      rep = solve_stationary(level, alpha, warm, cfg);
      if (!rep.converged && warm) rep = solve_stationary(level, alpha, std::nullopt, cfg);
    } catch (const std::exception& e) {
      rep.point.alpha = alpha;
      rep.psi = std::numeric_limits<double>::quiet_NaN();
      rep.residual_norm = kInf;
      rep.converged = false;
      rep.trace.emplace_back(e.what());
    }
    if (rep.converged) warm = rep.point;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace reluinj
