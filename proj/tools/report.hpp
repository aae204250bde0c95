#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reluinj/empirical.hpp"
#include "reluinj/model.hpp"
#include "reluinj/solver.hpp"

namespace reluinj::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Format { Json, Csv, Human };

Format parse_format(const std::string& text);

/// %.10g text of x; "nan"/"inf" spelled out.
std::string g10(double x);
/// JSON number holding exactly the %.10g rounding of x, or null when x is not finite.
nlohmann::json jnum(double x);

nlohmann::json params_json(Level level, const EvalPoint& point);
nlohmann::json quad_json(const QuadConfig& cfg, const std::string& profile);

void write_capacity(std::ostream& os, Format format, const CapacityResult& res, const QuadConfig& cfg,
                    const std::string& profile, std::uint64_t seed);
void write_evaluation(std::ostream& os, Format format, Level level, const EvalPoint& point, const EvalResult& res,
                      const QuadConfig& cfg, const std::string& profile);
void write_sweep(std::ostream& os, Format format, Level level, const std::vector<SolveReport>& reports,
                 const QuadConfig& cfg, const std::string& profile);
void write_scan(std::ostream& os, Format format, int n, const std::vector<ScanRow>& rows);

}  // namespace reluinj::cli
