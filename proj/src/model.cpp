#include "reluinj/model.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "reluinj/errors.hpp"

namespace reluinj {

std::string_view level_name(Level level) {
  switch (level) {
    case Level::R1: return "1";
    case Level::R2Partial: return "2p";
    case Level::R2Full: return "2";
    case Level::R3: return "3";
  }
  return "?";
}

Level parse_level(std::string_view text) {
  if (text == "1") return Level::R1;
  if (text == "2p") return Level::R2Partial;
  if (text == "2") return Level::R2Full;
  if (text == "3") return Level::R3;
  throw std::invalid_argument("unknown level '" + std::string(text) + "' (expected 1, 2p, 2 or 3)");
}

LiftingParams LiftingParams::level1() { return LiftingParams{}; }

LiftingParams LiftingParams::level2(double p2, double q2, double c2) {
  LiftingParams l;
  l.r = 2;
  l.p = {p2};
  l.q = {q2};
  l.c = {c2};
  return l;
}

LiftingParams LiftingParams::level3(double p2, double p3, double q2, double q3, double c2,
                                    double c3) {
  LiftingParams l;
  l.r = 3;
  l.p = {p2, p3};
  l.q = {q2, q3};
  l.c = {c2, c3};
  return l;
}

double EvalResult::residual_norm() const {
  double acc = 0.0;
  for (const auto& r : grad) acc += r.value * r.value;
  return std::sqrt(acc);
}

QuadConfig QuadConfig::profile(std::string_view name) {
  QuadConfig cfg;
  if (name == "default") return cfg;
  if (name == "fast") {
    cfg.nodes_single = 64;
    cfg.nodes_inner = 64;
    cfg.nodes_outer = 32;
    return cfg;
  }
  if (name == "fine") {
    cfg.nodes_single = 192;
    cfg.nodes_inner = 192;
    cfg.nodes_outer = 96;
    return cfg;
  }
  throw std::invalid_argument("unknown quadrature profile '" + std::string(name) + "'");
}

QuadConfig QuadConfig::from_environment() {
  const char* env = std::getenv("RELUINJ_QUAD_PROFILE");
  return profile(env != nullptr && *env != '\0' ? std::string_view(env) : "default");
}

Coefficients coeffs_bc(const LiftingParams& lifting) {
  // Sequences padded with the boundary values: x_1 = 1, ..., x_{r+1} = 0.
  auto padded = [&](const std::vector<double>& free) {
    std::vector<double> full;
    full.reserve(free.size() + 2);
    full.push_back(1.0);
    full.insert(full.end(), free.begin(), free.end());
    full.push_back(0.0);
    return full;
  };
  auto roots = [](const std::vector<double>& full, const char* name) {
    std::vector<double> out;
    for (std::size_t k = 1; k < full.size(); ++k) {
      const double d = full[k - 1] - full[k];
      if (d < 0.0) {
        throw DomainError(std::string("coeffs_bc: ordering violation in ") + name);
      }
      out.push_back(std::sqrt(d));
    }
    return out;
  };
  return Coefficients{roots(padded(lifting.p), "p"), roots(padded(lifting.q), "q")};
}

double phi_bar_z(double u, double nu) {
  if (u <= 0.0) return -u * u - nu;
  if (u * u <= 2.0 * nu) return -nu;
  return -u * u + nu;
}

std::vector<Violation> validate(const EvalPoint& point) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };
  if (!(point.alpha > 0.0) || !std::isfinite(point.alpha)) add("alpha", "must be positive and finite");

  const auto& l = point.lifting;
  if (l.r < 1 || l.r > 3) {
    add("r", "lifting level must be 1, 2 or 3");
  } else {
    const auto expected = static_cast<std::size_t>(l.r - 1);
    if (l.p.size() != expected) add("p", "expected " + std::to_string(expected) + " entries");
    if (l.q.size() != expected) add("q", "expected " + std::to_string(expected) + " entries");
    if (l.c.size() != expected) add("c", "expected " + std::to_string(expected) + " entries");
  }
  auto check_sequence = [&](const std::vector<double>& seq, const char* name) {
    double prev = 1.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::string field = std::string(name) + std::to_string(i + 2);
      if (!std::isfinite(seq[i]) || seq[i] < 0.0 || seq[i] >= 1.0) {
        add(field, "ordering violation: must lie in [0, 1)");
      } else if (seq[i] > prev) {
        add(field, "ordering violation: sequence must be nonincreasing");
      }
      prev = seq[i];
    }
  };
  check_sequence(l.p, "p");
  check_sequence(l.q, "q");
  for (std::size_t i = 0; i < l.c.size(); ++i) {
    if (!(l.c[i] > 0.0) || !std::isfinite(l.c[i])) {
      add("c" + std::to_string(i + 2), "positivity violation: must be positive");
    }
  }
  if (!(point.aux.gamma_q > 0.0) || !std::isfinite(point.aux.gamma_q)) add("gamma_q", "positivity violation");
  if (!(point.aux.gamma_p > 0.0) || !std::isfinite(point.aux.gamma_p)) add("gamma_p", "positivity violation");
  if (!(point.aux.nu >= 0.0) || !std::isfinite(point.aux.nu)) add("nu", "must be nonnegative");
  return out;
}

}  // namespace reluinj
