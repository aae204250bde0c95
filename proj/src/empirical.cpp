#include "reluinj/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace reluinj {
namespace {

// Sum of squares of the positive entries of v outside the n-1 largest positive ones, plus the
// per-entry mask of the entries that are paid (tail set).
double tail_energy(const Eigen::VectorXd& v, int n, std::vector<char>* tail) {
  std::vector<Eigen::Index> pos;
  pos.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) pos.push_back(i);
  }
  const std::size_t keep = static_cast<std::size_t>(n - 1);
  if (tail) tail->assign(static_cast<std::size_t>(v.size()), 0);
  if (pos.size() <= keep) return 0.0;
  auto larger = [&](Eigen::Index a, Eigen::Index b) { return v[a] > v[b] || (v[a] == v[b] && a < b); };
  std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(keep), pos.end(), larger);
  double sum = 0.0;
  for (std::size_t k = keep; k < pos.size(); ++k) {
    sum += v[pos[k]] * v[pos[k]];
    if (tail) (*tail)[static_cast<std::size_t>(pos[k])] = 1;
  }
  return sum;
}

std::string g10(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct RestartOutcome {
  double energy = 0.0;
  bool converged = false;
};

RestartOutcome descend(const Eigen::MatrixXd& a, int n, Eigen::VectorXd x, int iters, double step0) {
  std::vector<char> tail;
  Eigen::VectorXd v = a * x;
  double f = tail_energy(v, n, &tail);
  double step = step0;
  for (int it = 0; it < iters; ++it) {
    if (f <= 0.0) return {0.0, true};
    Eigen::VectorXd r = Eigen::VectorXd::Zero(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (tail[static_cast<std::size_t>(i)]) r[i] = v[i];
    }
    Eigen::VectorXd g = 2.0 * a.transpose() * r;
    g -= g.dot(x) * x;  // tangent component
    const double gnorm2 = g.squaredNorm();
    if (gnorm2 <= 1e-30 * std::max(f, 1e-300)) return {f, true};
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::VectorXd xn = (x - step * g).normalized();
      Eigen::VectorXd vn = a * xn;
      std::vector<char> tn;
      const double fn = tail_energy(vn, n, &tn);
      if (fn <= f - 1e-4 * step * gnorm2) {
        const bool tiny = f - fn <= 1e-12 * f;
        x = std::move(xn);
        v = std::move(vn);
        tail = std::move(tn);
        f = fn;
        step *= 2.0;
        moved = true;
        if (tiny) return {f, true};
        break;
      }
      step *= 0.5;
    }
    if (!moved) return {f, true};
  }
  return {f, f <= 0.0};
}

}  // namespace

int InstanceConfig::m() const { return static_cast<int>(std::lround(alpha * n)); }

void check_config(const InstanceConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("instance: n must be at least 2");
  if (!(cfg.alpha > 0.0) || cfg.m() < cfg.n) throw std::invalid_argument("instance: m = round(alpha n) must be at least n");
  if (cfg.restarts < 1) throw std::invalid_argument("instance: restarts must be at least 1");
  if (cfg.iters < 1) throw std::invalid_argument("instance: iters must be at least 1");
}

Eigen::MatrixXd sample_instance(const InstanceConfig& cfg) {
  check_config(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(cfg.m(), cfg.n);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  }
  return a;
}

double tail_norm(const Eigen::VectorXd& v, int n) {
  if (n < 1 || v.size() < n) throw std::invalid_argument("tail_norm: need 1 <= n <= length of v");
  return std::sqrt(tail_energy(v, n, nullptr));
}

EmpiricalResult min_xi(const Eigen::MatrixXd& a, const InstanceConfig& cfg, double threshold) {
  check_config(cfg);
  if (a.cols() != cfg.n || a.rows() < cfg.n) throw std::invalid_argument("min_xi: matrix shape does not match cfg");
  const double step0 = 1.0 / a.squaredNorm();
  EmpiricalResult out;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(r), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(cfg.n);
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = normal(rng);
    x.normalize();
    const RestartOutcome o = descend(a, cfg.n, x, cfg.iters, step0);
    const double xi = std::sqrt(o.energy) / std::sqrt(static_cast<double>(cfg.n));
    out.per_restart.push_back(xi);
    if (xi < best) {
      best = xi;
      out.converged = o.converged;
    }
  }
  out.xi_hat = best;
  out.positive_fraction = best > threshold ? 1.0 : 0.0;
  return out;
}

std::uint64_t instance_seed(std::uint64_t seed, std::size_t row, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(trial)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<ScanRow> transition_scan(int n, const std::vector<double>& alphas, int trials, std::uint64_t seed,
                                     const ScanOptions& options) {
  if (trials < 1) throw std::invalid_argument("transition_scan: trials must be at least 1");
  std::vector<ScanRow> rows;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    ScanRow row;
    row.alpha = alphas[k];
    row.trials = trials;
    row.seed = seed;
    std::vector<double> xis;
    int positive = 0;
    for (int t = 0; t < trials; ++t) {
      InstanceConfig cfg{n, alphas[k], instance_seed(seed, k, static_cast<std::size_t>(t)), options.restarts,
                         options.iters};
      const EmpiricalResult res = min_xi(sample_instance(cfg), cfg, options.threshold);
      xis.push_back(res.xi_hat);
      if (res.xi_hat > options.threshold) ++positive;
      if (!res.converged) ++row.unconverged;
    }
    std::sort(xis.begin(), xis.end());
    const std::size_t h = xis.size() / 2;
    row.median_xi = xis.size() % 2 ? xis[h] : 0.5 * (xis[h - 1] + xis[h]);
    row.positive_fraction = static_cast<double>(positive) / trials;
    rows.push_back(row);
  }
  return rows;
}

bool nondecreasing(const std::vector<ScanRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].positive_fraction < rows[i - 1].positive_fraction) return false;
  }
  return true;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "alpha,trials,positive_fraction,median_xi,seed\r\n";
  for (const ScanRow& r : rows) {
    os << g10(r.alpha) << ',' << r.trials << ',' << g10(r.positive_fraction) << ',' << g10(r.median_xi) << ','
       << r.seed << "\r\n";
  }
}

}  // namespace reluinj
