#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace reluinj {

struct InstanceConfig {
  int n = 40;
  double alpha = 3.0;
  std::uint64_t seed = 1;
  int restarts = 10;
  int iters = 400;

  /// round(alpha * n)
  int m() const;
};

/// Throws std::invalid_argument unless n >= 2, m >= n and restarts, iters >= 1.
void check_config(const InstanceConfig& cfg);

/// HEURISTIC estimate of the ground-state energy of one instance.
struct EmpiricalResult {
  double xi_hat = 0.0;
  std::vector<double> per_restart;
  /// Convergence of the restart that produced xi_hat.
  bool converged = true;
  double positive_fraction = 0.0;
};

/// m x n matrix of iid standard normals, reproducible from cfg.seed.
Eigen::MatrixXd sample_instance(const InstanceConfig& cfg);

/// min over z with fewer than n positive entries of ||v - z||_2. Nonpositive entries of v cost
/// nothing; the n-1 largest positive entries are matched and the remaining positive entries
/// are paid in full. Ties go to the lowest index.
double tail_norm(const Eigen::VectorXd& v, int n);

/// Alternating support selection and projected gradient steps on the unit sphere, best over
/// cfg.restarts random starts. xi_hat = best tail_norm(Ax) / sqrt(n).
EmpiricalResult min_xi(const Eigen::MatrixXd& a, const InstanceConfig& cfg, double threshold = 0.02);

/// Seed of instance `trial` in row `row` of a scan; shared by transition_scan and its callers.
std::uint64_t instance_seed(std::uint64_t seed, std::size_t row, std::size_t trial);

struct ScanRow {
  double alpha = 0.0;
  int trials = 0;
  double positive_fraction = 0.0;
  double median_xi = 0.0;
  std::uint64_t seed = 0;
  int unconverged = 0;
};

struct ScanOptions {
  int restarts = 10;
  int iters = 400;
  double threshold = 0.02;
};

std::vector<ScanRow> transition_scan(int n, const std::vector<double>& alphas, int trials, std::uint64_t seed,
                                     const ScanOptions& options = {});

/// True when positive_fraction never decreases along the rows.
bool nondecreasing(const std::vector<ScanRow>& rows);

/// Header "alpha,trials,positive_fraction,median_xi,seed" then one line per row.
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);

}  // namespace reluinj
