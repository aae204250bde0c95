#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reluinj {

/// Which lifted free energy is being evaluated or solved.
enum class Level { R1, R2Partial, R2Full, R3 };

std::string_view level_name(Level level);
/// Parses "1", "2p", "2", "3"; throws std::invalid_argument otherwise.
Level parse_level(std::string_view text);

/// Free entries of the lifting sequences. p, q and c hold [x_2, ..., x_r];
/// the boundary values x_1 -> 1 and x_{r+1} = 0 are implied and never stored.
struct LiftingParams {
  int r = 1;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> c;

  static LiftingParams level1();
  static LiftingParams level2(double p2, double q2, double c2);
  static LiftingParams level3(double p2, double p3, double q2, double q3, double c2, double c3);

  double p2() const { return at(p, 0); }
  double p3() const { return at(p, 1); }
  double q2() const { return at(q, 0); }
  double q3() const { return at(q, 1); }
  double c2() const { return at(c, 0); }
  double c3() const { return at(c, 1); }

private:
  static double at(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; }
};

/// Square-root-trick multipliers and the cardinality multiplier.
struct AuxParams {
  double gamma_q = 0.5;
  double gamma_p = 0.5;
  double nu = 0.0;
};

struct EvalPoint {
  double alpha = 1.0;
  LiftingParams lifting;
  AuxParams aux;
};

struct Residual {
  std::string name;
  double value = 0.0;
};

struct EvalDiagnostics {
  int nodes_inner = 0;
  int nodes_outer = 0;
  double wall_ms = 0.0;
};

struct EvalResult {
  double psi = 0.0;
  std::vector<Residual> grad;
  EvalDiagnostics diagnostics;

  double residual_norm() const;
};

/// Quadrature resolution plus solver tolerances.
///
/// Level two integrates its single outer expectation with `nodes_single` Gauss-Hermite
/// nodes; level three uses a `nodes_inner` x `nodes_outer` tensor grid over (u3, u4).
struct QuadConfig {
  int nodes_single = 128;
  int nodes_inner = 128;
  int nodes_outer = 64;
  double psi_tol = 2e-5;
  double grad_tol = 1e-8;
  std::pair<double, double> alpha_bracket{5.0, 10.0};
  int max_iters = 60;
  double damping = 0.5;

  /// "fast", "default" or "fine"; throws std::invalid_argument for anything else.
  static QuadConfig profile(std::string_view name);
  /// Profile named by the RELUINJ_QUAD_PROFILE environment variable, "default" when unset.
  static QuadConfig from_environment();
};

/// b_k = sqrt(p_{k-1} - p_k), c_k = sqrt(q_{k-1} - q_k) for k = 2..r+1.
struct Coefficients {
  std::vector<double> b;
  std::vector<double> c;
};

/// Throws DomainError when a radicand is negative (ordering violation).
Coefficients coeffs_bc(const LiftingParams& lifting);

/// min over z of (z^2 - 2uz) + nu*sign(z), with sign(0) = -1: the per-coordinate
/// minimum of the cardinality-penalized fit.
double phi_bar_z(double u, double nu);

struct Violation {
  std::string field;
  std::string message;
};

/// Every violated invariant of the point; empty when the point is valid.
std::vector<Violation> validate(const EvalPoint& point);

}  // namespace reluinj
