#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reluinj/empirical.hpp"

using namespace reluinj;

namespace {

// Enumerates every set S of at most n-1 coordinates allowed a positive z entry. Outside S the
// best z is min(v, 0), which costs max(v, 0)^2.
double tail_norm_oracle(const Eigen::VectorXd& v, int n) {
  const int m = static_cast<int>(v.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) > n - 1) continue;
    double cost = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!(mask >> i & 1u) && v[i] > 0.0) cost += v[i] * v[i];
    }
    best = std::min(best, cost);
  }
  return std::sqrt(best);
}

}  // namespace

TEST(SampleInstance, DeterministicAndStandardNormal) {
  InstanceConfig cfg{1000, 1.0, 42};
  const Eigen::MatrixXd a = sample_instance(cfg);
  EXPECT_EQ(a.rows(), 1000);
  EXPECT_TRUE(a == sample_instance(cfg));
  oracle::Stats st;
  for (Eigen::Index i = 0; i < a.size(); ++i) st.add(a.data()[i]);
  EXPECT_NEAR(st.mean, 0.0, 0.005);
  EXPECT_NEAR(st.var(), 1.0, 0.01);
  cfg.seed = 43;
  EXPECT_FALSE(a == sample_instance(cfg));
}

TEST(SampleInstance, ShapeAndValidation) {
  const InstanceConfig cfg{7, 2.5, 3};
  EXPECT_EQ(cfg.m(), 18);
  EXPECT_EQ(sample_instance(cfg).cols(), 7);
  EXPECT_THROW(sample_instance(InstanceConfig{1, 3.0, 1}), std::invalid_argument);
  EXPECT_THROW(sample_instance(InstanceConfig{10, 0.5, 1}), std::invalid_argument);
  EXPECT_THROW(check_config(InstanceConfig{10, 3.0, 1, 0}), std::invalid_argument);
  EXPECT_THROW(check_config(InstanceConfig{10, 3.0, 1, 2, 0}), std::invalid_argument);
}

TEST(TailNorm, SmallExample) {
  Eigen::VectorXd v(4);
  v << 3.0, -1.0, 0.5, 2.0;
  // Keep the single largest positive entry; 0.5 and 2 are paid, -1 is free.
  EXPECT_NEAR(tail_norm(v, 2), std::sqrt(4.25), 1e-15);
  EXPECT_NEAR(tail_norm(v, 4), 0.0, 1e-15);
  EXPECT_NEAR(tail_norm(v, 1), std::sqrt(9.0 + 0.25 + 4.0), 1e-15);
  EXPECT_EQ(tail_norm(Eigen::VectorXd::Zero(5), 2), 0.0);
  EXPECT_EQ(tail_norm(-Eigen::VectorXd::Ones(5), 1), 0.0);
  EXPECT_THROW(tail_norm(v, 5), std::invalid_argument);
}

TEST(TailNorm, MatchesExhaustiveSupportSearch) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> um(2, 12);
  for (int k = 0; k < 300; ++k) {
    const int m = um(rng);
    std::uniform_int_distribution<int> un(1, m);
    const int n = un(rng);
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = normal(rng);
    if (k % 5 == 0) v[0] = v[m - 1];  // ties
    EXPECT_NEAR(tail_norm(v, n), tail_norm_oracle(v, n), 1e-12);
  }
}

TEST(MinXi, NoWorseThanSphereSampling) {
  const InstanceConfig cfg{6, 12.0, 5, 10, 400};
  const Eigen::MatrixXd a = sample_instance(cfg);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  double sampled = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200'000; ++k) {
    Eigen::VectorXd x(cfg.n);
    for (int j = 0; j < cfg.n; ++j) x[j] = normal(rng);
    x.normalize();
    sampled = std::min(sampled, tail_norm(a * x, cfg.n) / std::sqrt(6.0));
  }
  const EmpiricalResult r = min_xi(a, cfg);
  EXPECT_GT(r.xi_hat, 0.1);
  EXPECT_LE(r.xi_hat, sampled + 1e-9);
  EXPECT_EQ(r.per_restart.size(), 10u);
  EXPECT_EQ(r.xi_hat, *std::min_element(r.per_restart.begin(), r.per_restart.end()));
}

TEST(MinXi, MoreRestartsNeverHurt) {
  InstanceConfig cfg{20, 6.0, 11, 1, 300};
  const Eigen::MatrixXd a = sample_instance(cfg);
  const double one = min_xi(a, cfg).xi_hat;
  cfg.restarts = 6;
  const EmpiricalResult six = min_xi(a, cfg);
  EXPECT_LE(six.xi_hat, one);
  EXPECT_EQ(six.per_restart.front(), one);
}

TEST(MinXi, Deterministic) {
  const InstanceConfig cfg{15, 5.0, 4, 4, 200};
  const Eigen::MatrixXd a = sample_instance(cfg);
  EXPECT_EQ(min_xi(a, cfg).per_restart, min_xi(a, cfg).per_restart);
}

TEST(MinXi, OverdeterminedIsPositive) {
  const InstanceConfig cfg{40, 10.0, 2};
  const EmpiricalResult r = min_xi(sample_instance(cfg), cfg);
  EXPECT_GT(r.xi_hat, 0.05);
  EXPECT_EQ(r.positive_fraction, 1.0);
}

TEST(MinXi, ShapeMismatch) {
  const InstanceConfig cfg{10, 3.0, 1};
  EXPECT_THROW(min_xi(Eigen::MatrixXd::Ones(30, 9), cfg), std::invalid_argument);
}

TEST(TransitionScan, SingleTrialEqualsOneCall) {
  const ScanOptions opt{3, 200, 0.02};
  const auto rows = transition_scan(12, {4.0, 8.0}, 1, 99, opt);
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const InstanceConfig cfg{12, rows[k].alpha, instance_seed(99, k, 0), 3, 200};
    EXPECT_EQ(rows[k].median_xi, min_xi(sample_instance(cfg), cfg).xi_hat);
    EXPECT_EQ(rows[k].trials, 1);
    EXPECT_EQ(rows[k].seed, 99u);
  }
  EXPECT_NE(instance_seed(99, 0, 0), instance_seed(99, 0, 1));
  EXPECT_NE(instance_seed(99, 0, 1), instance_seed(99, 1, 0));
  EXPECT_THROW(transition_scan(12, {4.0}, 0, 1), std::invalid_argument);
}

TEST(TransitionScan, MonotoneCheckAndCsv) {
  std::vector<ScanRow> rows(3);
  rows[0] = {3.0, 4, 0.0, 0.0, 7};
  rows[1] = {5.0, 4, 0.5, 0.01, 7};
  rows[2] = {7.0, 4, 1.0, 0.25, 7};
  EXPECT_TRUE(nondecreasing(rows));
  std::ostringstream os;
  write_scan_csv(os, rows);
  EXPECT_EQ(os.str(),
            "alpha,trials,positive_fraction,median_xi,seed\r\n3,4,0,0,7\r\n5,4,0.5,0.01,7\r\n7,4,1,0.25,7\r\n");
  rows[2].positive_fraction = 0.25;
  EXPECT_FALSE(nondecreasing(rows));
}
