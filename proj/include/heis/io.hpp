#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heis/point.hpp"
#include "heis/region.hpp"
#include "heis/transport.hpp"
#include "heis/verify.hpp"

namespace heis {

using json = nlohmann::json;

/// JSON has no inf/nan; those travel as the strings "inf", "-inf", "nan".
json json_number(double v);

/// [ξ₁, η₁, …, ξₙ, ηₙ, t]
json to_json(const HPoint& p);
HPoint point_from_json(const json& j);

json to_json(const Region& r);
Region region_from_json(const json& j);

/// {"pairs": [[i, j, mass], …], "cost": c, "method": "exact" | "sinkhorn", …}
json to_json(const TransportPlan& plan);
TransportPlan plan_from_json(const json& j);

json to_json(const InequalityReport& r);
InequalityReport report_from_json(const json& j);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

inline constexpr const char* kCsvHeader = "name,s,lhs,rhs,margin,stderr,holds";
std::string csv_row(const InequalityReport& r);

struct SolverConfig {
  Method method = Method::exact_lp;
  std::optional<double> epsilon;  ///< Sinkhorn ε; default is a fraction of the median cost
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct OutputConfig {
  std::string path;              ///< empty: stdout only
  std::string format = "json";   ///< json or csv
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  int n = 1;
  Region a = Region::unit_box(1);
  Region b = Region::unit_box(1);
  std::vector<double> s_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t samples = 400;
  std::uint64_t seed = 1;
  double h = 0.1;
  double r = 0.05;
  SolverConfig solver;
  OutputConfig output;
  double p = 0.0;  ///< BBL exponent
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

json to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults. Throws std::invalid_argument on bad values.
ExperimentConfig config_from_json(const json& j);

}  // namespace heis
