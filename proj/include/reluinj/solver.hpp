#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reluinj/model.hpp"

namespace reluinj {

struct SolveReport {
  EvalPoint point;
  double psi = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<Residual> residuals;
  std::vector<std::string> trace;
};

struct BracketStep {
  double alpha = 0.0;
  double psi = 0.0;
};

struct CapacityResult {
  Level level = Level::R1;
  double alpha_star = 0.0;
  EvalPoint point;
  double psi_residual = 0.0;
  double grad_residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<BracketStep> bracket_history;
};

// Variable layout per level, in the same order as the residual vector:
//   1:  gamma_q gamma_p nu
//   2p: c2 gamma_q gamma_p nu
//   2:  c2 p2 q2 gamma_q gamma_p nu
//   3:  c2 c3 p2 p3 q2 q3 gamma_q gamma_p nu
std::vector<std::string> variable_names(Level level);
std::vector<double> pack_variables(Level level, const EvalPoint& point);
EvalPoint unpack_variables(Level level, double alpha, const std::vector<double>& values);

/// Free energy of the level at an arbitrary point, together with its full residual vector.
EvalResult evaluate_full(Level level, const EvalPoint& point, const QuadConfig& cfg);
/// Value only; cheaper than evaluate_full.
double psi_value(Level level, const EvalPoint& point, const QuadConfig& cfg);
/// Partial derivative in alpha at fixed parameters, which at a stationary point is also the
/// total derivative along the stationary branch.
double dpsi_dalpha(Level level, const EvalPoint& point, const QuadConfig& cfg);

/// Stationary point of the level's free energy at fixed alpha. Without init the solver starts
/// cold (level-1 solution, then coarse scans over the lifting parameters).
SolveReport solve_stationary(Level level, double alpha, const std::optional<EvalPoint>& init,
                             const QuadConfig& cfg);

/// Root in alpha of the stationary free energy. Lower levels are solved first to seed the
/// requested one. Throws BracketError when cfg.alpha_bracket holds no sign change.
CapacityResult capacity(Level level, const QuadConfig& cfg);
/// Same, starting the alpha iteration from a known point (alpha taken from seed.alpha).
CapacityResult capacity(Level level, const QuadConfig& cfg, const EvalPoint& seed);
/// Capacities of every level from 1 up to `top`, each seeding the next.
std::vector<CapacityResult> capacity_ladder(Level top, const QuadConfig& cfg);

struct FdGradient {
  std::vector<double> values;
  std::vector<bool> one_sided;
};

/// Central differences per coordinate; falls back to a one-sided difference (flagged) when
/// f throws on one side. Throws DomainError when both sides fail.
FdGradient fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                       const std::vector<double>& x, double step);

/// Continuation over sorted alphas. Failed solves are reported (converged = false) and the
/// next alpha restarts from the last good point.
std::vector<SolveReport> sweep(Level level, const std::vector<double>& alphas, const QuadConfig& cfg);

}  // namespace reluinj
