#include "reluinj/gaussian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace reluinj {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

// Continued fraction e^{x^2} erfc(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated bottom-up. Only used for x >= 26 where 80 levels are far beyond what is needed.
double erfcx_continued_fraction(double x) {
  double tail = x;
  for (int k = 80; k >= 1; --k) {
    tail = x + 0.5 * k / tail;
  }
  return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

double log_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// exp(log_phi(z) - log_mass), zero when z is infinite.
double pdf_ratio(double z, double log_mass) {
  if (std::isinf(z)) return 0.0;
  return std::exp(log_normal_pdf(z) - log_mass);
}

}  // namespace

double erfc(double x) { return std::erfc(x); }

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 26.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  if (std::isinf(x)) return 0.0;
  return erfcx_continued_fraction(x);
}

double log_erfc(double x) {
  if (x < 5.0) return std::log(std::erfc(x));
  if (std::isinf(x)) return -kInf;
  return std::log(erfcx(x)) - x * x;
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_normal_sf(double x) { return log_erfc(x / kSqrt2) - kLn2; }

double log_normal_cdf(double x) { return log_normal_sf(-x); }

double log_normal_interval(double lo, double hi) {
  if (!(lo < hi)) return -kInf;
  if (lo > 0.0) {
    const double a = log_normal_sf(lo);
    const double b = log_normal_sf(hi);
    return a + std::log1p(-std::exp(b - a));
  }
  if (hi < 0.0) {
    const double a = log_normal_cdf(hi);
    const double b = log_normal_cdf(lo);
    return a + std::log1p(-std::exp(b - a));
  }
  return std::log1p(-(normal_sf(hi) + normal_cdf(lo)));
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInf) return -kInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(double a, double b, double c) {
  const double m = std::max({a, b, c});
  if (m == -kInf) return -kInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

QuadRule gauss_hermite(int n) {
  if (n < 1 || n > 256) {
    throw std::invalid_argument("gauss_hermite: node count must lie in [1, 256], got " +
                                std::to_string(n));
  }
  // Golub-Welsch eigenvalues seed a long double Newton polish on orthonormal physicists'
  // Hermite polynomials; weights come from the polished derivative.
  using real = long double;
  const real pim4 = 0.7511255444649424828587030047762276930510L;  // pi^{-1/4}
  const int half = (n + 1) / 2;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 1));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& roots = eig.eigenvalues();  // ascending

  std::vector<real> z_pos(static_cast<std::size_t>(half));
  std::vector<real> w_pos(static_cast<std::size_t>(half));
  const real nn = static_cast<real>(n);
  for (int i = 0; i < half; ++i) {
    real z = std::fabs(static_cast<real>(roots[n - 1 - i]));
    if (n % 2 == 1 && i == half - 1) z = 0.0L;
    real pp = 0.0L;
    for (int iter = 0; iter < 50; ++iter) {
      real p1 = pim4;
      real p2 = 0.0L;
      for (int j = 1; j <= n; ++j) {
        const real p3 = p2;
        p2 = p1;
        const real jj = static_cast<real>(j);
        p1 = z * std::sqrt(2.0L / jj) * p2 - std::sqrt((jj - 1.0L) / jj) * p3;
      }
      pp = std::sqrt(2.0L * nn) * p2;
      const real z_old = z;
      z = z_old - p1 / pp;
      if (std::fabs(z - z_old) <= 1e-18L * std::max<real>(1.0L, std::fabs(z))) break;
    }
    z_pos[static_cast<std::size_t>(i)] = z;
    w_pos[static_cast<std::size_t>(i)] = 2.0L / (pp * pp);
  }

  // z_pos is descending; lay out ascending and mirror so the rule is exactly symmetric.
  QuadRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const real sqrt2 = std::sqrt(2.0L);
  real total = 0.0L;
  for (real w : w_pos) total += 2.0L * w;
  if (n % 2 == 1) total -= w_pos.back();
  for (int i = 0; i < half; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const double x = static_cast<double>(sqrt2 * z_pos[lo]);
    const double w = static_cast<double>(w_pos[lo] / total);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

const QuadRule& cached_gauss_hermite(int n) {
  static std::array<std::unique_ptr<QuadRule>, 257> cache;
  static std::mutex mutex;
  if (n < 1 || n > 256) {
    throw std::invalid_argument("cached_gauss_hermite: node count must lie in [1, 256], got " +
                                std::to_string(n));
  }
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[static_cast<std::size_t>(n)];
  if (!slot) slot = std::make_unique<QuadRule>(gauss_hermite(n));
  return *slot;
}

I1Partials i1_partials(const GaussianQuadratic& g) {
  if (!(g.C >= 0.0)) throw std::invalid_argument("i1: C must be nonnegative");
  if (!(g.D <= g.F)) throw std::invalid_argument("i1: requires D <= F");
  const double A = g.A;
  const double B = g.B;
  const double C = g.C;

  I1Partials out;
  auto edge = [&](double t) {
    if (std::isinf(t)) return 0.0;
    const double u = A * t + B;
    return normal_pdf(t) * std::exp(-C * u * u);
  };
  out.dD = -edge(g.D);
  out.dF = edge(g.F);

  // n(t) e^{-C(At+B)^2} = pref * density of N(m, 1/s) with s = 1 + 2A^2C.
  const double s = 1.0 + 2.0 * A * A * C;
  const double root_s = std::sqrt(s);
  const double m = -2.0 * C * A * B / s;
  const double zD = (g.D - m) * root_s;
  const double zF = (g.F - m) * root_s;
  const double log_mass = log_normal_interval(zD, zF);
  const double log_pref = -C * B * B / s - 0.5 * std::log(s);
  out.log_value = log_pref + log_mass;
  out.value = std::exp(out.log_value);
  if (!std::isfinite(out.log_value)) {
    if (out.log_value == -kInf) {
      out.value = 0.0;
      return out;
    }
    throw DomainError("i1: non-finite value");
  }

  // Moments of t under the truncated N(m, 1/s).
  const double sigma = 1.0 / root_s;
  const double rD = pdf_ratio(zD, log_mass);
  const double rF = pdf_ratio(zF, log_mass);
  const double zrD = std::isinf(zD) ? 0.0 : zD * rD;
  const double zrF = std::isinf(zF) ? 0.0 : zF * rF;
  const double e1 = m + sigma * (rD - rF);
  const double e2 = m * m + 2.0 * m * sigma * (rD - rF) + sigma * sigma * (1.0 + zrD - zrF);

  out.t_mean = e1;
  out.t_sq_mean = e2;
  out.dA = -2.0 * C * out.value * (A * e2 + B * e1);
  out.dB = -2.0 * C * out.value * (A * e1 + B);
  out.dC = -out.value * (A * A * e2 + 2.0 * A * B * e1 + B * B);
  return out;
}

double i1(const GaussianQuadratic& g) {
  const double v = i1_partials(g).value;
  if (!std::isfinite(v)) throw DomainError("i1: non-finite value");
  return v;
}

}  // namespace reluinj
