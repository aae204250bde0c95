#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reluinj/empirical.hpp"
#include "reluinj/errors.hpp"
#include "reluinj/model.hpp"
#include "reluinj/solver.hpp"
#include "report.hpp"

namespace {

using namespace reluinj;

constexpr int kExitNonConvergence = 2;
constexpr int kExitDomain = 3;
constexpr int kExitUsage = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadOverrides {
  std::string profile;
  std::optional<int> nodes_single, nodes_inner, nodes_outer, max_iters;
  std::optional<double> psi_tol, grad_tol, alpha_lo, alpha_hi, damping;

  QuadConfig build() const {
    QuadConfig cfg = profile.empty() ? QuadConfig::from_environment() : QuadConfig::profile(profile);
    if (nodes_single) cfg.nodes_single = *nodes_single;
    if (nodes_inner) cfg.nodes_inner = *nodes_inner;
    if (nodes_outer) cfg.nodes_outer = *nodes_outer;
    if (max_iters) cfg.max_iters = *max_iters;
    if (psi_tol) cfg.psi_tol = *psi_tol;
    if (grad_tol) cfg.grad_tol = *grad_tol;
    if (alpha_lo) cfg.alpha_bracket.first = *alpha_lo;
    if (alpha_hi) cfg.alpha_bracket.second = *alpha_hi;
    if (damping) cfg.damping = *damping;
    return cfg;
  }

  std::string name() const {
    if (!profile.empty()) return profile;
    const char* env = std::getenv("RELUINJ_QUAD_PROFILE");
    return env != nullptr && *env != '\0' ? env : "default";
  }
};

void add_quad_options(CLI::App* cmd, QuadOverrides& q) {
  cmd->add_option("--quad-profile", q.profile, "fast, default or fine (default: $RELUINJ_QUAD_PROFILE or default)");
  cmd->add_option("--nodes-single", q.nodes_single, "Gauss-Hermite nodes for the level-2 expectation");
  cmd->add_option("--nodes-inner", q.nodes_inner, "level-3 nodes over u3");
  cmd->add_option("--nodes-outer", q.nodes_outer, "level-3 nodes over u4");
  cmd->add_option("--psi-tol", q.psi_tol, "tolerance on psi at the capacity");
  cmd->add_option("--grad-tol", q.grad_tol, "tolerance on the residual norm");
  cmd->add_option("--alpha-lo", q.alpha_lo, "lower end of the alpha bracket");
  cmd->add_option("--alpha-hi", q.alpha_hi, "upper end of the alpha bracket");
  cmd->add_option("--max-iters", q.max_iters, "iteration cap for Newton and the alpha search");
  cmd->add_option("--damping", q.damping, "initial Newton damping");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

struct PointFlags {
  std::optional<double> alpha, p2, p3, q2, q3, c2, c3, gamma_q, gamma_p, nu;

  EvalPoint build(Level level) const {
    auto need = [](const std::optional<double>& v, const char* flag) {
      if (!v) throw UsageError(std::string("evaluate: missing required flag ") + flag);
      return *v;
    };
    EvalPoint point;
    point.alpha = need(alpha, "--alpha");
    point.aux = {need(gamma_q, "--gamma-q"), need(gamma_p, "--gamma-p"), need(nu, "--nu")};
    switch (level) {
      case Level::R1:
        point.lifting = LiftingParams::level1();
        break;
      case Level::R2Partial:
        point.lifting = LiftingParams::level2(0.0, 0.0, need(c2, "--c2"));
        break;
      case Level::R2Full:
        point.lifting = LiftingParams::level2(need(p2, "--p2"), need(q2, "--q2"), need(c2, "--c2"));
        break;
      case Level::R3:
        point.lifting = LiftingParams::level3(need(p2, "--p2"), need(p3, "--p3"), need(q2, "--q2"),
                                              need(q3, "--q3"), need(c2, "--c2"), need(c3, "--c3"));
        break;
    }
    return point;
  }
};

Level level_arg(const std::string& text) {
  try {
    return parse_level(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

cli::Format format_arg(const std::string& text) {
  try {
    return cli::parse_format(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifted free energies and capacity of ReLU layer injectivity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kVersion);

  std::string format = "human";
  std::string level_text;
  std::uint64_t seed = 1;
  QuadOverrides quad;
  app.add_option("--format", format, "json, csv or human")->capture_default_str();

  auto* table = app.add_subcommand("table", "reproduce one parameter row (computed from scratch)");
  table->add_option("--level", level_text, "1, 2p, 2 or 3")->required();
  add_quad_options(table, quad);

  auto* cap = app.add_subcommand("capacity", "solve for the capacity of one level");
  cap->add_option("--level", level_text, "1, 2p, 2 or 3")->required();
  cap->add_option("--seed", seed, "recorded in the output");
  add_quad_options(cap, quad);

  PointFlags pf;
  auto* eval = app.add_subcommand("evaluate", "free energy and residuals at a point");
  eval->add_option("--level", level_text, "1, 2p, 2 or 3")->required();
  eval->add_option("--alpha", pf.alpha);
  eval->add_option("--p2", pf.p2);
  eval->add_option("--p3", pf.p3);
  eval->add_option("--q2", pf.q2);
  eval->add_option("--q3", pf.q3);
  eval->add_option("--c2", pf.c2);
  eval->add_option("--c3", pf.c3);
  eval->add_option("--gamma-q", pf.gamma_q);
  eval->add_option("--gamma-p", pf.gamma_p);
  eval->add_option("--nu", pf.nu);
  add_quad_options(eval, quad);

  std::string alphas_text;
  auto* sw = app.add_subcommand("sweep", "stationary free energy over a list of alphas");
  sw->add_option("--level", level_text, "1, 2p, 2 or 3")->required();
  sw->add_option("--alphas", alphas_text, "comma-separated, increasing")->required();
  add_quad_options(sw, quad);

  int n = 40, trials = 20;
  ScanOptions scan;
  std::string scan_alphas = "3,5,7,9,11";
  auto* emp = app.add_subcommand("empirical", "finite-n transition scan (heuristic minimizer)");
  emp->add_option("--n", n, "input dimension")->capture_default_str();
  emp->add_option("--alphas", scan_alphas, "comma-separated aspect ratios")->capture_default_str();
  emp->add_option("--trials", trials, "instances per alpha")->capture_default_str();
  emp->add_option("--restarts", scan.restarts, "random starts per instance")->capture_default_str();
  emp->add_option("--iters", scan.iters, "descent iterations per start")->capture_default_str();
  emp->add_option("--threshold", scan.threshold, "xi above this counts as positive")->capture_default_str();
  emp->add_option("--seed", seed, "base seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const cli::Format fmt = format_arg(format);
    const std::string profile = quad.name();
    QuadConfig cfg;
    try {
      cfg = quad.build();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    if (*table || *cap) {
      const Level level = level_arg(level_text);
      const CapacityResult res = capacity(level, cfg);
      cli::write_capacity(std::cout, fmt, res, cfg, profile, seed);
      if (!res.converged) {
        std::cerr << "capacity: solver did not converge (psi = " << cli::g10(res.psi_residual)
                  << ", |grad| = " << cli::g10(res.grad_residual_norm) << ")\n";
        return kExitNonConvergence;
      }
      return 0;
    }
    if (*eval) {
      const Level level = level_arg(level_text);
      const EvalPoint point = pf.build(level);
      const auto violations = validate(point);
      if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << "evaluate: " << v.field << ": " << v.message << '\n';
        return kExitDomain;
      }
      const EvalResult res = evaluate_full(level, point, cfg);
      cli::write_evaluation(std::cout, fmt, level, point, res, cfg, profile);
      return 0;
    }
    if (*sw) {
      const Level level = level_arg(level_text);
      const auto alphas = parse_list(alphas_text);
      if (!std::is_sorted(alphas.begin(), alphas.end())) throw UsageError("sweep: --alphas must be increasing");
      const auto reports = sweep(level, alphas, cfg);
      cli::write_sweep(std::cout, fmt, level, reports, cfg, profile);
      bool all = true;
      for (const auto& r : reports) {
        if (!r.converged) {
          all = false;
          std::cerr << "sweep: no stationary point at alpha " << cli::g10(r.point.alpha) << '\n';
        }
      }
      return all ? 0 : kExitNonConvergence;
    }
    if (*emp) {
      const auto alphas = parse_list(scan_alphas);
      std::vector<ScanRow> rows;
      try {
        rows = transition_scan(n, alphas, trials, seed, scan);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      std::cerr << "empirical: heuristic minimizer; xi values are upper estimates\n";
      cli::write_scan(std::cout, fmt, n, rows);
      if (!nondecreasing(rows)) std::cerr << "empirical: positive_fraction is not monotone in alpha\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BracketError& e) {
    std::cerr << "error: " << e.what() << " (psi at bracket ends: " << cli::g10(e.lo_value()) << ", "
              << cli::g10(e.hi_value()) << ")\n";
    return kExitNonConvergence;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  }
  return kExitUsage;
}
