#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace reluinj::cli {
namespace {

const char* kParamNames[] = {"p2", "p3", "q2", "q3", "c2", "c3", "gamma_q", "gamma_p", "nu"};

// Parameter values in kParamNames order; NaN marks a parameter the level does not have.
std::vector<double> param_values(Level level, const EvalPoint& point) {
  const double nan = std::nan("");
  const auto& l = point.lifting;
  const auto& a = point.aux;
  switch (level) {
    case Level::R1:
      return {nan, nan, nan, nan, nan, nan, a.gamma_q, a.gamma_p, a.nu};
    case Level::R2Partial:
      return {nan, nan, nan, nan, l.c2(), nan, a.gamma_q, a.gamma_p, a.nu};
    case Level::R2Full:
      return {l.p2(), nan, l.q2(), nan, l.c2(), nan, a.gamma_q, a.gamma_p, a.nu};
    case Level::R3:
      return {l.p2(), l.p3(), l.q2(), l.q3(), l.c2(), l.c3(), a.gamma_q, a.gamma_p, a.nu};
  }
  return {};
}

std::string csv_field(double x) { return std::isfinite(x) ? g10(x) : ""; }

}  // namespace

Format parse_format(const std::string& text) {
  if (text == "json") return Format::Json;
  if (text == "csv") return Format::Csv;
  if (text == "human") return Format::Human;
  throw std::invalid_argument("unknown format '" + text + "'");
}

std::string g10(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

nlohmann::json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(g10(x));
}

nlohmann::json params_json(Level level, const EvalPoint& point) {
  nlohmann::json out = nlohmann::json::object();
  const auto values = param_values(level, point);
  for (std::size_t i = 0; i < values.size(); ++i) out[kParamNames[i]] = jnum(values[i]);
  return out;
}

nlohmann::json quad_json(const QuadConfig& cfg, const std::string& profile) {
  return {{"profile", profile},
          {"nodes_single", cfg.nodes_single},
          {"nodes_inner", cfg.nodes_inner},
          {"nodes_outer", cfg.nodes_outer},
          {"psi_tol", jnum(cfg.psi_tol)},
          {"grad_tol", jnum(cfg.grad_tol)},
          {"alpha_bracket", {jnum(cfg.alpha_bracket.first), jnum(cfg.alpha_bracket.second)}},
          {"max_iters", cfg.max_iters},
          {"damping", jnum(cfg.damping)}};
}

void write_capacity(std::ostream& os, Format format, const CapacityResult& res, const QuadConfig& cfg,
                    const std::string& profile, std::uint64_t seed) {
  const auto values = param_values(res.level, res.point);
  switch (format) {
    case Format::Json: {
      nlohmann::json doc = {{"level", std::string(level_name(res.level))},
                            {"alpha_star", jnum(res.alpha_star)},
                            {"params", params_json(res.level, res.point)},
                            {"psi_residual", jnum(res.psi_residual)},
                            {"grad_residual_norm", jnum(res.grad_residual_norm)},
                            {"converged", res.converged},
                            {"quad", quad_json(cfg, profile)},
                            {"seed", seed},
                            {"version", kVersion}};
      os << doc.dump(2) << '\n';
      break;
    }
    case Format::Csv: {
      os << "level,alpha_star";
      for (const char* name : kParamNames) os << ',' << name;
      os << ",psi_residual,grad_residual_norm\r\n";
      os << level_name(res.level) << ',' << g10(res.alpha_star);
      for (double v : values) os << ',' << csv_field(v);
      os << ',' << g10(res.psi_residual) << ',' << g10(res.grad_residual_norm) << "\r\n";
      break;
    }
    case Format::Human: {
      os << "level " << level_name(res.level) << (res.converged ? "" : " (NOT converged)") << '\n';
      os << "  alpha*     " << g10(res.alpha_star) << '\n';
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) continue;
        char label[16];
        std::snprintf(label, sizeof label, "%-10s", kParamNames[i]);
        os << "  " << label << ' ' << g10(values[i]) << '\n';
      }
      os << "  psi        " << g10(res.psi_residual) << '\n';
      os << "  |grad|     " << g10(res.grad_residual_norm) << '\n';
      os << "  4*gq*gp    " << g10(4.0 * res.point.aux.gamma_q * res.point.aux.gamma_p) << '\n';
      break;
    }
  }
}

void write_evaluation(std::ostream& os, Format format, Level level, const EvalPoint& point, const EvalResult& res,
                      const QuadConfig& cfg, const std::string& profile) {
  switch (format) {
    case Format::Json: {
      nlohmann::json residuals = nlohmann::json::object();
      for (const auto& r : res.grad) residuals[r.name] = jnum(r.value);
      nlohmann::json doc = {{"level", std::string(level_name(level))},
                            {"alpha", jnum(point.alpha)},
                            {"params", params_json(level, point)},
                            {"psi", jnum(res.psi)},
                            {"residuals", residuals},
                            {"grad_residual_norm", jnum(res.residual_norm())},
                            {"quad", quad_json(cfg, profile)},
                            {"version", kVersion}};
      os << doc.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      os << "quantity,value\r\n";
      os << "psi," << g10(res.psi) << "\r\n";
      for (const auto& r : res.grad) os << r.name << ',' << g10(r.value) << "\r\n";
      break;
    case Format::Human:
      os << "level " << level_name(level) << " at alpha " << g10(point.alpha) << '\n';
      os << "  psi          " << g10(res.psi) << '\n';
      for (const auto& r : res.grad) {
        char label[24];
        std::snprintf(label, sizeof label, "%-12s", r.name.c_str());
        os << "  " << label << ' ' << g10(r.value) << '\n';
      }
      os << "  |grad|       " << g10(res.residual_norm()) << '\n';
      break;
  }
}

void write_sweep(std::ostream& os, Format format, Level level, const std::vector<SolveReport>& reports,
                 const QuadConfig& cfg, const std::string& profile) {
  if (format == Format::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
      rows.push_back({{"alpha", jnum(r.point.alpha)},
                      {"psi", jnum(r.psi)},
                      {"residual_norm", jnum(r.residual_norm)},
                      {"converged", r.converged},
                      {"params", params_json(level, r.point)}});
    }
    nlohmann::json doc = {{"level", std::string(level_name(level))},
                          {"rows", rows},
                          {"quad", quad_json(cfg, profile)},
                          {"version", kVersion}};
    os << doc.dump(2) << '\n';
    return;
  }
  // CSV and human share the plain table.
  os << "alpha,psi,residual_norm,converged\r\n";
  for (const auto& r : reports) {
    os << g10(r.point.alpha) << ',' << csv_field(r.psi) << ',' << csv_field(r.residual_norm) << ','
       << (r.converged ? "true" : "false") << "\r\n";
  }
}

void write_scan(std::ostream& os, Format format, int n, const std::vector<ScanRow>& rows) {
  if (format != Format::Json) {
    write_scan_csv(os, rows);
    return;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const ScanRow& r : rows) {
    out.push_back({{"alpha", jnum(r.alpha)},
                   {"trials", r.trials},
                   {"positive_fraction", jnum(r.positive_fraction)},
                   {"median_xi", jnum(r.median_xi)},
                   {"seed", r.seed},
                   {"unconverged", r.unconverged}});
  }
  nlohmann::json doc = {{"n", n}, {"rows", out}, {"version", kVersion}};
  os << doc.dump(2) << '\n';
}

}  // namespace reluinj::cli
