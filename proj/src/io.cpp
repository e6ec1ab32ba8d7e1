#include "pq/error.hpp"
#include "pq/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace pq {

namespace {

json vector_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json values_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

[[noreturn]] void bad_trace(const std::string& what) {
  raise(ErrorCode::ConfigError, "malformed trace document: " + what);
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key)) bad_trace(std::string("missing '") + key + "'");
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) bad_trace(std::string("'") + key + "' is not a number");
  return v.get<double>();
}

Eigen::VectorXd read_values(const json& j, int expected) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected) bad_trace("nodal value count");
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) {
    if (!j[i].is_number()) bad_trace("non-numeric nodal value");
    v[i] = j[i].get<double>();
  }
  return v;
}

json norms_json(const TrackedNorms& n) {
  return {{"lp_grad", number(n.lp_grad)},
          {"linf_interior", number(n.linf_interior)},
          {"linf_grad_interior", number(n.linf_grad_interior)},
          {"h2_interior", number(n.h2_interior)}};
}

TrackedNorms norms_from_json(const json& j) {
  return {read_number(j, "lp_grad"), read_number(j, "linf_interior"),
          read_number(j, "linf_grad_interior"), read_number(j, "h2_interior")};
}

json stats_json(const SolveStats& s) {
  return {{"method", s.method},
          {"iterations", s.iterations},
          {"backtracks", s.backtracks},
          {"initial_residual", number(s.initial_residual)},
          {"final_residual", number(s.final_residual)},
          {"last_increment", number(s.last_increment)}};
}

SolveStats stats_from_json(const json& j) {
  SolveStats s;
  s.method = j.value("method", "");
  s.iterations = j.value("iterations", 0);
  s.backtracks = j.value("backtracks", 0);
  s.initial_residual = read_number(j, "initial_residual");
  s.final_residual = read_number(j, "final_residual");
  s.last_increment = read_number(j, "last_increment");
  return s;
}

}  // namespace

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

json sample_to_json(const Sample& s) {
  json j = {{"x", vector_json(s.x)}, {"u", number(s.u)}, {"xi", vector_json(s.xi)}};
  if (s.eta.size() > 0) j["eta"] = vector_json(s.eta);
  if (s.lambda.size() > 0) j["lambda"] = vector_json(s.lambda);
  return j;
}

json report_to_json(const AssumptionReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    json fitted = json::object();
    for (const auto& [k, v] : e.fitted) fitted[k] = number(v);
    entries.push_back({{"id", e.id},
                       {"pass", e.pass},
                       {"worst_margin", number(e.worst_margin)},
                       {"witness", e.witness ? sample_to_json(*e.witness) : json(nullptr)},
                       {"fitted", fitted},
                       {"note", e.note}});
  }
  return {{"all_pass", report.all_pass()}, {"entries", entries}};
}

json mesh_to_json(const Mesh& mesh) {
  return {{"dim", mesh.dim()}, {"box", box_to_json(mesh.box())}, {"nodes", mesh.nodes_per_axis()}};
}

json field_to_json(const DiscreteField& U) {
  return {{"mesh", mesh_to_json(U.mesh())}, {"values", values_json(U.values())}};
}

json trace_to_json(const TraceDocument& doc) {
  const ContinuationTrace& t = doc.trace;
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"eps", number(s.eps)},
                     {"stats", stats_json(s.stats)},
                     {"norms", norms_json(s.norms)},
                     {"increment", number(s.increment)},
                     {"values", values_json(s.U.values())}});
  }
  json j;
  j["operator"] = doc.operator_descriptor;
  j["rhs"] = doc.rhs_descriptor;
  j["mesh"] = mesh_to_json(*t.mesh);
  j["schedule"] = {{"eps0", t.schedule.eps0}, {"ratio", t.schedule.ratio}, {"steps", t.schedule.steps}};
  j["newton"] = newton_to_json(doc.newton);
  j["p"] = t.p;
  j["q"] = t.q;
  j["delta"] = t.delta;
  j["initial"] = values_json(t.initial.values());
  j["steps"] = steps;
  if (t.extrapolated) {
    j["limit"] = {{"norms", norms_json(*t.extrapolated_norms)},
                  {"values", values_json(t.extrapolated->values())}};
  } else {
    j["limit"] = nullptr;
  }
  return j;
}

TraceDocument trace_from_json(const json& j) {
  if (!j.is_object()) bad_trace("not an object");
  for (const char* key : {"operator", "rhs", "mesh", "schedule", "newton", "steps", "initial"}) {
    if (!j.contains(key)) bad_trace(std::string("missing '") + key + "'");
  }
  const json& m = j.at("mesh");
  if (!m.contains("dim") || !m.contains("box") || !m.contains("nodes")) bad_trace("mesh block");
  const MeshPtr mesh = build_mesh(m.at("dim").get<int>(), box_from_json(m.at("box")),
                                  m.at("nodes").get<std::vector<int>>());

  TraceDocument doc{ContinuationTrace{mesh, read_number(j, "p"), read_number(j, "q"),
                                      read_number(j, "delta"), EpsilonSchedule{},
                                      DiscreteField(mesh), {}, std::nullopt, std::nullopt},
                    j.at("operator"), j.at("rhs"), newton_from_json(j.at("newton"))};
  ContinuationTrace& t = doc.trace;
  const json& s = j.at("schedule");
  t.schedule.eps0 = read_number(s, "eps0");
  t.schedule.ratio = read_number(s, "ratio");
  t.schedule.steps = s.at("steps").get<int>();
  t.initial = DiscreteField(mesh, read_values(j.at("initial"), mesh->num_nodes()));
  for (const auto& st : j.at("steps")) {
    t.steps.push_back({read_number(st, "eps"),
                       DiscreteField(mesh, read_values(st.at("values"), mesh->num_nodes())),
                       stats_from_json(st.at("stats")), norms_from_json(st.at("norms")),
                       read_number(st, "increment")});
  }
  if (j.contains("limit") && !j.at("limit").is_null()) {
    t.extrapolated = DiscreteField(mesh, read_values(j.at("limit").at("values"), mesh->num_nodes()));
    t.extrapolated_norms = norms_from_json(j.at("limit").at("norms"));
  }
  return doc;
}

std::string trace_to_csv(const ContinuationTrace& trace) {
  std::string out =
      "step,eps,method,iterations,final_residual,lp_grad,linf_interior,linf_grad_interior,"
      "h2_interior,increment\n";
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& s = trace.steps[k];
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", k, format_double(s.eps), s.stats.method,
                       s.stats.iterations, format_double(s.stats.final_residual),
                       format_double(s.norms.lp_grad), format_double(s.norms.linf_interior),
                       format_double(s.norms.linf_grad_interior),
                       format_double(s.norms.h2_interior), format_double(s.increment));
  }
  return out;
}

std::string estimates_to_csv(const EstimateReport& report) {
  std::string out = "eps,lp_grad,bracket,ratio,c_gradient,c_hessian,alpha,pstar\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", format_double(r.eps), format_double(r.lp_grad),
                       format_double(r.bracket), format_double(r.ratio),
                       format_double(r.c_gradient), format_double(r.c_hessian),
                       format_double(r.alpha), format_double(r.pstar));
  }
  return out;
}

json estimates_summary_to_json(const EstimateReport& r) {
  return {{"pass", r.pass()},
          {"n", r.n},
          {"p", r.p},
          {"q", r.q},
          {"pstar", number(r.pstar)},
          {"delta", number(r.delta)},
          {"balls", {{"center", vector_json(r.balls.center)}, {"rho", r.balls.rho}, {"R", r.balls.R}}},
          {"alpha_extrapolated", r.alpha_extrapolated},
          {"lp_ratio", number(r.lp_uniformity.ratio)},
          {"lp_uniform", r.lp_uniformity.pass},
          {"c_gradient_variation", number(r.c_gradient_variation)},
          {"c_hessian_variation", number(r.c_hessian_variation)},
          {"constants_uniform", r.constants_pass},
          {"limit_row_included", !r.rows.empty() && r.rows.back().label == "limit"}};
}

std::string mms_to_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "nodes,h,l2_error,w12_error,l2_order,w12_order,nodal_error,iterations\n";
  for (const auto& r : rows) {
    auto order = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.nodes, format_double(r.h),
                       format_double(r.l2_error), format_double(r.w12_error), order(r.l2_order),
                       order(r.w12_order), format_double(r.nodal_error), r.iterations);
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<double>>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  if (!std::getline(in, line)) raise(ErrorCode::ConfigError, "empty CSV");
  {
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) cols.push_back({name, {}});
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= cols.size()) raise(ErrorCode::ConfigError, "CSV row has too many cells");
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty()) {
        try {
          v = std::stod(cell);
        } catch (const std::logic_error&) {
          // non-numeric columns (labels) are kept as NaN
        }
      }
      cols[c++].second.push_back(v);
    }
    // A trailing empty cell is dropped by getline.
    while (c < cols.size()) cols[c++].second.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  return cols;
}

json report_merge(const json& trace_doc, const std::string& estimates_csv) {
  const TraceDocument doc = trace_from_json(trace_doc);
  const auto cols = parse_csv(estimates_csv);

  json steps = json::array();
  for (const auto& s : doc.trace.steps) {
    steps.push_back({{"eps", number(s.eps)},
                     {"method", s.stats.method},
                     {"iterations", s.stats.iterations},
                     {"final_residual", number(s.stats.final_residual)},
                     {"norms", norms_json(s.norms)},
                     {"increment", number(s.increment)}});
  }
  json estimates = json::object();
  for (const auto& [name, values] : cols) {
    json a = json::array();
    for (double v : values) a.push_back(number(v));
    estimates[name] = a;
  }
  json summary;
  summary["operator"] = doc.operator_descriptor;
  summary["rhs"] = doc.rhs_descriptor;
  summary["mesh"] = trace_doc.at("mesh");
  summary["schedule"] = schedule_to_string(doc.trace.schedule);
  summary["steps"] = steps;
  summary["estimates"] = estimates;
  if (doc.trace.steps.size() >= 2) {
    const UniformityResult u = check_uniform_lp(doc.trace);
    summary["lp_ratio"] = number(u.ratio);
    summary["lp_uniform"] = u.pass;
  }
  return summary;
}

}  // namespace pq
