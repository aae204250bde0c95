#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "reluinj/errors.hpp"
#include "reluinj/level_one.hpp"
#include "reluinj/level_two.hpp"
#include "reluinj/solver.hpp"

using namespace reluinj;

namespace {

void expect_rel(double got, double want, double rel, const char* what) {
  EXPECT_NEAR(got, want, rel * std::abs(want)) << what;
}

EvalPoint saddle2(double alpha) {
  return {alpha, LiftingParams::level2(0.7772, 0.1914, 8.4313), {3.6568, 0.0684, 0.0533}};
}

}  // namespace

TEST(Variables, PackRoundTrip) {
  const EvalPoint p{6.9, LiftingParams::level3(0.9, 0.7, 0.4, 0.2, 14.0, 7.0), {5.0, 0.05, 0.04}};
  const auto v = pack_variables(Level::R3, p);
  ASSERT_EQ(v.size(), variable_names(Level::R3).size());
  EXPECT_EQ(variable_names(Level::R3).front(), "c2");
  const EvalPoint q = unpack_variables(Level::R3, 6.9, v);
  EXPECT_EQ(pack_variables(Level::R3, q), v);
  EXPECT_EQ(variable_names(Level::R1).size(), 3u);
  EXPECT_EQ(variable_names(Level::R2Partial).size(), 4u);
  EXPECT_EQ(variable_names(Level::R2Full).size(), 6u);
}

TEST(FdGradient, QuadraticIsExact) {
  const auto f = [](const std::vector<double>& x) { return 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + 0.5 * x[1]; };
  const FdGradient g = fd_gradient(f, {1.5, -2.0}, 1e-3);
  EXPECT_NEAR(g.values[0], 6.0 * 1.5 + 4.0, 1e-10);
  EXPECT_NEAR(g.values[1], -3.0 + 0.5, 1e-10);
  EXPECT_FALSE(g.one_sided[0]);
  EXPECT_FALSE(g.one_sided[1]);
}

TEST(FdGradient, OneSidedNearDomainEdge) {
  const auto f = [](const std::vector<double>& x) {
    if (x[0] < 0.0) throw DomainError("negative");
    return x[0] * x[0];
  };
  const FdGradient g = fd_gradient(f, {0.0}, 1e-4);
  EXPECT_TRUE(g.one_sided[0]);
  EXPECT_NEAR(g.values[0], 1e-4, 1e-12);
  const auto bad = [](const std::vector<double>&) -> double { throw DomainError("never"); };
  EXPECT_THROW(fd_gradient(bad, {1.0}, 1e-4), DomainError);
}

TEST(SolveStationary, LevelOneMatchesClosedForm) {
  const SolveReport r = solve_stationary(Level::R1, 7.6477, std::nullopt, QuadConfig());
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.point.aux.nu, solve_nu1(7.6477), 1e-9);
  EXPECT_NEAR(r.psi, psi1(7.6477, r.point.aux.nu), 1e-12);
  EXPECT_NEAR(r.point.aux.gamma_q, 0.5, 1e-12);
}

TEST(SolveStationary, FullSecondLevelFromColdStart) {
  const QuadConfig cfg;
  const SolveReport r = solve_stationary(Level::R2Full, 6.7157, std::nullopt, cfg);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.residual_norm, cfg.grad_tol * 10);
  EXPECT_NEAR(r.psi, 0.0, 1e-3);
  const EvalPoint t = saddle2(6.7157);
  expect_rel(r.point.lifting.p2(), t.lifting.p2(), 0.01, "p2");
  expect_rel(r.point.lifting.q2(), t.lifting.q2(), 0.01, "q2");
  expect_rel(r.point.lifting.c2(), t.lifting.c2(), 0.01, "c2");
  expect_rel(r.point.aux.gamma_q, t.aux.gamma_q, 0.01, "gamma_q");
  expect_rel(r.point.aux.gamma_p, t.aux.gamma_p, 0.01, "gamma_p");
  expect_rel(r.point.aux.nu, t.aux.nu, 0.01, "nu");

  // Warm start from the reference point lands on the same stationary point.
  const SolveReport w = solve_stationary(Level::R2Full, 6.7157, t, cfg);
  ASSERT_TRUE(w.converged);
  EXPECT_NEAR(w.psi, r.psi, cfg.psi_tol);
}

TEST(SolveStationary, ClosedFormHoldsAtSolution) {
  const SolveReport r = solve_stationary(Level::R2Full, 6.9, saddle2(6.9), QuadConfig());
  ASSERT_TRUE(r.converged);
  const ClosedForm2 cf = closed_form_r2(r.point.lifting.p2(), r.point.lifting.q2());
  EXPECT_NEAR(cf.c2, r.point.lifting.c2(), 1e-6 * cf.c2);
  EXPECT_NEAR(cf.gamma_q, r.point.aux.gamma_q, 1e-6 * cf.gamma_q);
}

TEST(SolveStationary, ThirdLevelFromSplitSecondLevel) {
  QuadConfig cfg;
  const EvalPoint init{6.7004, LiftingParams::level3(0.97, 0.75, 0.43, 0.17, 14.0, 7.0), {5.2, 0.048, 0.036}};
  const SolveReport r = solve_stationary(Level::R3, 6.7004, init, cfg);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.psi, 0.0, 1e-3);
  expect_rel(r.point.lifting.p2(), 0.9766, 0.02, "p2");
  expect_rel(r.point.lifting.p3(), 0.7411, 0.02, "p3");
  expect_rel(r.point.lifting.q2(), 0.4279, 0.02, "q2");
  expect_rel(r.point.lifting.q3(), 0.1672, 0.02, "q3");
  expect_rel(r.point.lifting.c2(), 14.2862, 0.02, "c2");
  expect_rel(r.point.lifting.c3(), 7.1182, 0.02, "c3");
  expect_rel(r.point.aux.gamma_q, 5.2521, 0.02, "gamma_q");
  expect_rel(r.point.aux.gamma_p, 0.0476, 0.02, "gamma_p");
  expect_rel(r.point.aux.nu, 0.0357, 0.02, "nu");
}

TEST(Capacity, LevelOne) {
  const CapacityResult c = capacity(Level::R1, QuadConfig());
  ASSERT_TRUE(c.converged);
  EXPECT_NEAR(c.alpha_star, 7.6477, 1e-3);
  EXPECT_NEAR(c.point.aux.nu, 0.6304, 5e-4);
  EXPECT_NEAR(c.point.aux.gamma_q, 0.5, 1e-6);
  EXPECT_NEAR(c.point.aux.gamma_p, 0.5, 1e-6);
  EXPECT_FALSE(c.bracket_history.empty());
}

TEST(Capacity, PartialSecondLevel) {
  const CapacityResult c = capacity(Level::R2Partial, QuadConfig());
  ASSERT_TRUE(c.converged);
  EXPECT_NEAR(c.alpha_star, 7.4486, 2e-3);
  EXPECT_NEAR(c.point.aux.gamma_q, 0.9412, 2e-3);
  EXPECT_NEAR(c.point.aux.gamma_p, 0.2656, 2e-3);
  EXPECT_NEAR(c.point.aux.nu, 0.2785, 2e-3);
  EXPECT_NEAR(c.point.lifting.c2(), 1.3513, 2e-3);
}

TEST(Capacity, FullSecondLevel) {
  const CapacityResult c = capacity(Level::R2Full, QuadConfig());
  ASSERT_TRUE(c.converged);
  EXPECT_NEAR(c.alpha_star, 6.7157, 1e-2);
  EXPECT_LT(std::abs(c.psi_residual), QuadConfig().psi_tol);
  EXPECT_NEAR(4.0 * c.point.aux.gamma_q * c.point.aux.gamma_p, 1.0, 1e-4);
  const EvalPoint t = saddle2(c.alpha_star);
  expect_rel(c.point.lifting.p2(), t.lifting.p2(), 0.01, "p2");
  expect_rel(c.point.lifting.q2(), t.lifting.q2(), 0.01, "q2");
  expect_rel(c.point.lifting.c2(), t.lifting.c2(), 0.01, "c2");
  expect_rel(c.point.aux.gamma_q, t.aux.gamma_q, 0.01, "gamma_q");
  expect_rel(c.point.aux.gamma_p, t.aux.gamma_p, 0.01, "gamma_p");
  expect_rel(c.point.aux.nu, t.aux.nu, 0.01, "nu");
}

TEST(Capacity, LadderIsStrictlyDecreasing) {
  const auto ladder = capacity_ladder(Level::R3, QuadConfig());
  ASSERT_EQ(ladder.size(), 4u);
  for (const CapacityResult& c : ladder) {
    EXPECT_TRUE(c.converged) << level_name(c.level);
    EXPECT_NEAR(4.0 * c.point.aux.gamma_q * c.point.aux.gamma_p, 1.0, 1e-4) << level_name(c.level);
  }
  EXPECT_GT(ladder[0].alpha_star, ladder[1].alpha_star);
  EXPECT_GT(ladder[1].alpha_star, ladder[2].alpha_star);
  EXPECT_GT(ladder[2].alpha_star, ladder[3].alpha_star);
  EXPECT_NEAR(ladder[3].alpha_star, 6.7004, 2e-2);
}

TEST(Capacity, SeededMatchesCold) {
  const QuadConfig cfg;
  const CapacityResult cold = capacity(Level::R2Full, cfg);
  const CapacityResult warm = capacity(Level::R2Full, cfg, saddle2(6.8));
  EXPECT_NEAR(warm.alpha_star, cold.alpha_star, 1e-5);
}

TEST(Capacity, Deterministic) {
  const CapacityResult a = capacity(Level::R2Partial, QuadConfig());
  const CapacityResult b = capacity(Level::R2Partial, QuadConfig());
  EXPECT_EQ(a.alpha_star, b.alpha_star);
  EXPECT_EQ(pack_variables(Level::R2Partial, a.point), pack_variables(Level::R2Partial, b.point));
}

TEST(Capacity, BracketWithoutSignChange) {
  QuadConfig cfg;
  cfg.alpha_bracket = {8.0, 10.0};
  EXPECT_THROW(capacity(Level::R1, cfg), BracketError);
  cfg.alpha_bracket = {3.0, 6.0};
  EXPECT_THROW(capacity(Level::R1, cfg), BracketError);
}

TEST(Sweep, LevelOneIncreasesThroughCapacity) {
  std::vector<double> alphas;
  for (double a = 3.0; a <= 10.0 + 1e-12; a += 0.5) alphas.push_back(a);
  const auto rows = sweep(Level::R1, alphas, QuadConfig());
  ASSERT_EQ(rows.size(), alphas.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].converged) << alphas[i];
    if (i > 0) EXPECT_GT(rows[i].psi, rows[i - 1].psi);
    EXPECT_EQ(rows[i].psi < 0.0, alphas[i] < 7.6477) << alphas[i];
  }
}

TEST(Sweep, FullSecondLevelChangesSign) {
  const auto rows = sweep(Level::R2Full, {6.5, 6.6, 6.7, 6.8, 6.9, 7.0}, QuadConfig());
  ASSERT_EQ(rows.size(), 6u);
  for (const SolveReport& r : rows) ASSERT_TRUE(r.converged);
  EXPECT_LT(rows.front().psi, 0.0);
  EXPECT_GT(rows.back().psi, 0.0);
  EXPECT_LT(rows[2].psi, 0.0);
  EXPECT_GT(rows[3].psi, 0.0);
}

TEST(Sweep, SingleAlphaEqualsSolve) {
  const QuadConfig cfg;
  const auto rows = sweep(Level::R2Partial, {7.2}, cfg);
  const SolveReport r = solve_stationary(Level::R2Partial, 7.2, std::nullopt, cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].psi, r.psi, 1e-12);
}

TEST(EvaluateFull, DispatchesByLevel) {
  const QuadConfig cfg;
  const EvalPoint t = saddle2(6.7157);
  EXPECT_EQ(evaluate_full(Level::R2Full, t, cfg).psi, evaluate_level2(t, cfg).psi);
  EXPECT_EQ(psi_value(Level::R2Full, t, cfg), psi2_full(t, cfg).psi);
  EXPECT_NEAR(dpsi_dalpha(Level::R2Full, t, cfg), dpsi2_dalpha(t, cfg), 1e-14);
  const EvalPoint one{7.0, LiftingParams::level1(), {0.5, 0.5, 0.4}};
  EXPECT_NEAR(psi_value(Level::R1, one, cfg), -0.5 - 0.5 + 0.5 + psi1_radicand(7.0, 0.4) / 2.0, 1e-14);
}
