#pragma once

#include "pq/continuation.hpp"
#include "pq/estimates.hpp"
#include "pq/mms.hpp"
#include "pq/verify.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pq {

using json = nlohmann::json;

// --- Descriptors --------------------------------------------------------------
// Malformed descriptors raise ConfigError; structurally valid descriptors with
// inadmissible values raise the module's own error (e.g. InvalidExponents).

/// {"family", "p", "q", "m", "M", "alpha", "beta", "params": {...}, "domain": {"min", "max"}}
/// params: "exponent" / "weight" (scalar field) or "exponents" (array).
/// Scalar fields: {"type": "constant", "value"} | {"type": "affine", "offset", "gradient"}
///              | {"type": "ramp", "axis", "offset", "slope"}. A bare number is a constant.
OperatorPtr operator_from_json(const json& descriptor);
Box box_from_json(const json& domain);
json box_to_json(const Box& box);

/// "2d:65x65" or "1d:33".
struct MeshSpec {
  int dim = 2;
  std::vector<int> nodes;
  [[nodiscard]] std::string to_string() const;
};
MeshSpec parse_mesh_spec(const std::string& text);

/// "eps0=0.2,ratio=0.5,steps=5"; omitted keys keep their defaults.
EpsilonSchedule parse_schedule(const std::string& text);
std::string schedule_to_string(const EpsilonSchedule& s);

/// Right-hand side: "constant:v", "manufactured:case", or an object
/// {"type": "constant", "value"} | {"type": "manufactured", "case"}
/// | {"type": "table", "axes": [[...], ...], "values": [...]} (multilinear, x fastest).
struct Rhs {
  json descriptor;  // normalized object form
  RhsFunction b;
  std::optional<ManufacturedCase> manufactured;
};
json normalize_rhs(const json& spec);
Rhs rhs_from_json(const json& spec, const OperatorPtr& op);

NewtonConfig newton_from_json(const json& j);
json newton_to_json(const NewtonConfig& cfg);
SampleConfig sampling_from_json(const json& j);
json sampling_to_json(const SampleConfig& cfg);

/// Everything a CLI run needs. Unknown keys anywhere are rejected.
struct ExperimentConfig {
  json operator_descriptor;
  std::optional<json> rhs;
  std::string mesh = "2d:65x65";
  std::optional<std::string> schedule;
  NewtonConfig newton;
  std::optional<double> rho;
  std::optional<double> R;
  std::optional<double> delta;
  SampleConfig sampling;
  std::optional<std::string> mms_case;
  std::vector<int> grids{9, 17, 33, 65};
  bool linear_presolve = true;
};
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);

// --- Serialization --------------------------------------------------------------

/// Non-finite numbers become null.
json number(double v);

json sample_to_json(const Sample& s);
json report_to_json(const AssumptionReport& report);
json field_to_json(const DiscreteField& U);
json mesh_to_json(const Mesh& mesh);

/// Trace plus the descriptors needed to reproduce and post-process it.
struct TraceDocument {
  ContinuationTrace trace;
  json operator_descriptor;
  json rhs_descriptor;
  NewtonConfig newton;
};
json trace_to_json(const TraceDocument& doc);
TraceDocument trace_from_json(const json& j);

/// Float formatting for every CSV: 17 significant digits.
std::string format_double(double v);

std::string trace_to_csv(const ContinuationTrace& trace);
std::string estimates_to_csv(const EstimateReport& report);
json estimates_summary_to_json(const EstimateReport& report);
std::string mms_to_csv(const std::vector<ConvergenceRow>& rows);

/// Parses a CSV with a header row into column name -> values ("" -> NaN).
std::vector<std::pair<std::string, std::vector<double>>> parse_csv(const std::string& text);

/// Merges a trace document and an estimates CSV into one summary object.
json report_merge(const json& trace_doc, const std::string& estimates_csv);

}  // namespace pq
