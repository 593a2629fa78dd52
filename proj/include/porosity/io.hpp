#pragma once

// JSON configs in, JSON certificates/covers/reports and CSV fields out.

#include "porosity/certify.hpp"
#include "porosity/scenario.hpp"
#include "porosity/witness.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace porosity {

using Json = nlohmann::json;

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

NormSpec parse_space(const Json& j);
ConvexBody parse_body(const Json& j, const NormSpec& space);
MapExpr parse_map(const Json& j, const ConvexBody& body);
Tolerances parse_tolerances(const Json& j, Tolerances base = {});
Tamper parse_tamper(const Json& j);

/// Full scenario; every error (including map certification failures) is a
/// ConfigError.
Scenario parse_scenario(const Json& j);

/// Reads and parses a JSON file; ConfigError on I/O or syntax errors.
Json read_json(const std::string& path);

Json to_json(const NormSpec& space);
Json to_json(const ConvexBody& body);
Json to_json(const MapExpr& f);
Json to_json(const WitnessParams& p);
Json to_json(const Check& c);
Json to_json(const IntervalCover& cover);
Json to_json(const ResidualReport& report);
Json to_json(const SweepReport& report, const SubsetFamily& fam);

/// {"checks": [...], "overall": bool, "params": params, "info": {...}}
Json certificate_json(const Certificate& cert, const Json& params = Json::object());

/// Header x0,...,x{d-1},lip then one row per grid point, sorted
/// lexicographically by coordinates, 17 significant digits. Throws on an
/// empty field.
void write_field_csv(const LipField& field, std::ostream& out);

}  // namespace porosity
