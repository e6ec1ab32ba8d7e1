#include "pq/error.hpp"
#include "pq/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pq {

namespace {

[[noreturn]] void config_error(const std::string& message) { raise(ErrorCode::ConfigError, message); }

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be a JSON object");
}

void allow_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) config_error("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error("missing '" + std::string(key) + "' in " + where);
  const json& v = j.at(key);
  if (!v.is_number()) config_error("'" + std::string(key) + "' in " + where + " must be a number");
  return v.get<double>();
}

std::optional<double> opt_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, where);
}

int get_int(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) config_error("'" + std::string(key) + "' in " + where + " must be an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error("missing '" + std::string(key) + "' in " + where);
  const json& v = j.at(key);
  if (!v.is_string()) config_error("'" + std::string(key) + "' in " + where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& where) {
  if (!v.is_array()) config_error(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) config_error(where + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

ScalarField scalar_field_from_json(const json& j, int dim, const std::string& where) {
  if (j.is_number()) return ScalarField::constant(j.get<double>());
  require_object(j, where);
  const std::string type = get_string(j, "type", where);
  if (type == "constant") {
    allow_keys(j, {"type", "value"}, where);
    return ScalarField::constant(get_number(j, "value", where));
  }
  if (type == "affine") {
    allow_keys(j, {"type", "offset", "gradient"}, where);
    if (!j.contains("gradient")) config_error("missing 'gradient' in " + where);
    const auto g = number_array(j.at("gradient"), where + ".gradient");
    if (static_cast<int>(g.size()) != dim) config_error(where + ".gradient has wrong length");
    return ScalarField::affine(opt_number(j, "offset", where).value_or(0.0), to_vector(g));
  }
  if (type == "ramp") {
    allow_keys(j, {"type", "axis", "offset", "slope"}, where);
    if (!j.contains("axis")) config_error("missing 'axis' in " + where);
    const int axis = get_int(j, "axis", where);
    if (axis < 0 || axis >= dim) config_error(where + ".axis out of range");
    return ScalarField::ramp(axis, opt_number(j, "offset", where).value_or(0.0),
                             opt_number(j, "slope", where).value_or(1.0));
  }
  config_error("unknown scalar field type '" + type + "' in " + where);
}

// Multilinear interpolation on a tensor grid, clamped at the edges.
RhsFunction table_function(const json& j) {
  allow_keys(j, {"type", "axes", "values"}, "rhs table");
  if (!j.contains("axes") || !j.at("axes").is_array()) config_error("rhs table needs 'axes'");
  std::vector<std::vector<double>> axes;
  for (const auto& a : j.at("axes")) {
    axes.push_back(number_array(a, "rhs table axis"));
    if (axes.back().size() < 2 || !std::is_sorted(axes.back().begin(), axes.back().end())) {
      config_error("rhs table axes need at least 2 increasing entries");
    }
  }
  if (axes.empty() || axes.size() > 2) config_error("rhs table supports 1 or 2 axes");
  if (!j.contains("values")) config_error("rhs table needs 'values'");
  const auto values = number_array(j.at("values"), "rhs table values");
  std::size_t expected = 1;
  for (const auto& a : axes) expected *= a.size();
  if (values.size() != expected) config_error("rhs table values have the wrong length");

  return [axes, values](const Vector& x) {
    std::array<std::size_t, 2> idx{};
    std::array<double, 2> t{};
    for (std::size_t d = 0; d < axes.size(); ++d) {
      const auto& a = axes[d];
      const double xd = std::clamp(x[static_cast<Eigen::Index>(d)], a.front(), a.back());
      std::size_t k = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), xd) - a.begin());
      k = std::clamp<std::size_t>(k, 1, a.size() - 1) - 1;
      idx[d] = k;
      t[d] = (xd - a[k]) / (a[k + 1] - a[k]);
    }
    const std::size_t nx = axes[0].size();
    if (axes.size() == 1) return (1.0 - t[0]) * values[idx[0]] + t[0] * values[idx[0] + 1];
    auto at = [&](std::size_t i, std::size_t jj) { return values[i + jj * nx]; };
    return (1.0 - t[1]) * ((1.0 - t[0]) * at(idx[0], idx[1]) + t[0] * at(idx[0] + 1, idx[1])) +
           t[1] * ((1.0 - t[0]) * at(idx[0], idx[1] + 1) + t[0] * at(idx[0] + 1, idx[1] + 1));
  };
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) config_error("trailing characters in " + where + ": '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    config_error("cannot parse number in " + where + ": '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& where) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    config_error("cannot parse integer in " + where + ": '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Box box_from_json(const json& domain) {
  allow_keys(domain, {"min", "max"}, "domain");
  if (!domain.contains("min") || !domain.contains("max")) config_error("domain needs min and max");
  const auto lo = number_array(domain.at("min"), "domain.min");
  const auto hi = number_array(domain.at("max"), "domain.max");
  if (lo.size() != hi.size() || lo.empty() || lo.size() > static_cast<std::size_t>(kMaxDim)) {
    config_error("domain corners must have equal length in [1, 3]");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i])) raise(ErrorCode::MeshError, "degenerate domain box");
  }
  return Box(to_vector(lo), to_vector(hi));
}

json box_to_json(const Box& box) {
  json lo = json::array();
  json hi = json::array();
  for (int a = 0; a < box.dim(); ++a) {
    lo.push_back(box.lo[a]);
    hi.push_back(box.hi[a]);
  }
  return {{"min", lo}, {"max", hi}};
}

OperatorPtr operator_from_json(const json& d) {
  const std::string where = "operator descriptor";
  allow_keys(d, {"family", "p", "q", "m", "M", "alpha", "beta", "params", "domain"}, where);
  const std::string name = get_string(d, "family", where);
  const auto family = family_from_name(name);
  if (!family) config_error("unknown operator family '" + name + "'");

  FamilyParams params;
  params.domain = d.contains("domain") ? box_from_json(d.at("domain")) : Box::unit(2);
  const int dim = params.domain.dim();
  params.p = opt_number(d, "p", where).value_or(2.0);
  params.q = opt_number(d, "q", where);
  params.m = opt_number(d, "m", where);
  params.M = opt_number(d, "M", where);
  params.growth_alpha = opt_number(d, "alpha", where).value_or(0.0);
  params.beta = opt_number(d, "beta", where).value_or(0.0);

  if (d.contains("params")) {
    const json& p = d.at("params");
    allow_keys(p, {"exponent", "exponents", "weight"}, "operator params");
    if (p.contains("exponent")) params.exponent = scalar_field_from_json(p.at("exponent"), dim, "params.exponent");
    if (p.contains("weight")) params.weight = scalar_field_from_json(p.at("weight"), dim, "params.weight");
    if (p.contains("exponents")) params.exponents = number_array(p.at("exponents"), "params.exponents");
  }
  switch (*family) {
    case Family::VariableExponent:
    case Family::DegenerateVariableExponent:
      if (!d.contains("params") || !d.at("params").contains("exponent")) {
        config_error("variable-exponent family needs params.exponent");
      }
      break;
    case Family::Anisotropic:
    case Family::DegenerateAnisotropic:
      if (params.exponents.empty()) config_error("anisotropic family needs params.exponents");
      break;
    default:
      break;
  }
  return make_family(*family, params);
}

std::string MeshSpec::to_string() const {
  std::string s = std::to_string(dim) + "d:";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) s += "x";
    s += std::to_string(nodes[i]);
  }
  return s;
}

MeshSpec parse_mesh_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) config_error("mesh spec must look like '2d:65x65' (got '" + text + "')");
  const std::string head = text.substr(0, colon);
  MeshSpec spec;
  if (head == "1d") {
    spec.dim = 1;
  } else if (head == "2d") {
    spec.dim = 2;
  } else {
    config_error("mesh dimension must be 1d or 2d (got '" + head + "')");
  }
  std::stringstream rest(text.substr(colon + 1));
  std::string part;
  while (std::getline(rest, part, 'x')) spec.nodes.push_back(parse_int(part, "mesh spec"));
  if (static_cast<int>(spec.nodes.size()) != spec.dim) {
    config_error("mesh spec '" + text + "' needs one node count per axis");
  }
  for (int n : spec.nodes) {
    if (n < 3) raise(ErrorCode::MeshError, "need at least 3 nodes per axis");
  }
  return spec;
}

EpsilonSchedule parse_schedule(const std::string& text) {
  EpsilonSchedule s;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) config_error("schedule items must be key=value (got '" + item + "')");
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    if (key == "eps0") {
      s.eps0 = parse_double(value, "schedule eps0");
    } else if (key == "ratio") {
      s.ratio = parse_double(value, "schedule ratio");
    } else if (key == "steps") {
      s.steps = parse_int(value, "schedule steps");
    } else {
      config_error("unknown schedule key '" + key + "'");
    }
  }
  return s;
}

std::string schedule_to_string(const EpsilonSchedule& s) {
  return "eps0=" + format_double(s.eps0) + ",ratio=" + format_double(s.ratio) +
         ",steps=" + std::to_string(s.steps);
}

json normalize_rhs(const json& spec) {
  if (spec.is_string()) {
    const std::string text = spec.get<std::string>();
    const auto colon = text.find(':');
    if (colon == std::string::npos) config_error("rhs must be 'constant:v' or 'manufactured:case'");
    const std::string kind = trim(text.substr(0, colon));
    const std::string arg = trim(text.substr(colon + 1));
    if (kind == "constant") return {{"type", "constant"}, {"value", parse_double(arg, "rhs")}};
    if (kind == "manufactured") return {{"type", "manufactured"}, {"case", arg}};
    config_error("unknown rhs kind '" + kind + "'");
  }
  if (spec.is_number()) return {{"type", "constant"}, {"value", spec.get<double>()}};
  require_object(spec, "rhs");
  return spec;
}

Rhs rhs_from_json(const json& spec, const OperatorPtr& op) {
  Rhs rhs;
  rhs.descriptor = normalize_rhs(spec);
  const json& d = rhs.descriptor;
  const std::string type = get_string(d, "type", "rhs");
  if (type == "constant") {
    allow_keys(d, {"type", "value"}, "rhs");
    const double v = get_number(d, "value", "rhs");
    rhs.b = [v](const Vector&) { return v; };
  } else if (type == "manufactured") {
    allow_keys(d, {"type", "case"}, "rhs");
    const std::string name = get_string(d, "case", "rhs");
    const auto names = builtin_case_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      config_error("unknown manufactured case '" + name + "'");
    }
    ExactSolution exact = builtin_case(name);
    if (exact.domain.dim() != op->dim()) config_error("manufactured case dimension differs from operator");
    exact.domain = op->domain();
    rhs.manufactured = make_manufactured(op, exact);
    rhs.b = rhs.manufactured->b;
  } else if (type == "table") {
    rhs.b = table_function(d);
  } else {
    config_error("unknown rhs type '" + type + "'");
  }
  return rhs;
}

NewtonConfig newton_from_json(const json& j) {
  allow_keys(j, {"abs_tol", "rel_tol", "max_iters", "max_backtracks", "backtrack_factor",
                 "fixed_point_max_iters"},
             "newton");
  NewtonConfig c;
  const std::string w = "newton";
  c.abs_tol = opt_number(j, "abs_tol", w).value_or(c.abs_tol);
  c.rel_tol = opt_number(j, "rel_tol", w).value_or(c.rel_tol);
  if (j.contains("max_iters")) c.max_iters = get_int(j, "max_iters", w);
  if (j.contains("max_backtracks")) c.max_backtracks = get_int(j, "max_backtracks", w);
  c.backtrack_factor = opt_number(j, "backtrack_factor", w).value_or(c.backtrack_factor);
  if (j.contains("fixed_point_max_iters")) c.fixed_point_max_iters = get_int(j, "fixed_point_max_iters", w);
  try {
    c.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

json newton_to_json(const NewtonConfig& c) {
  return {{"abs_tol", c.abs_tol},
          {"rel_tol", c.rel_tol},
          {"max_iters", c.max_iters},
          {"max_backtracks", c.max_backtracks},
          {"backtrack_factor", c.backtrack_factor},
          {"fixed_point_max_iters", c.fixed_point_max_iters}};
}

SampleConfig sampling_from_json(const json& j) {
  allow_keys(j, {"seed", "count", "xi_radius", "u_radius", "large_xi_radius", "tolerance",
                 "tolerance_strict", "u_floor"},
             "sampling");
  SampleConfig c;
  const std::string w = "sampling";
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) config_error("seed must be an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("count")) c.count = get_int(j, "count", w);
  c.xi_radius = opt_number(j, "xi_radius", w).value_or(c.xi_radius);
  c.u_radius = opt_number(j, "u_radius", w).value_or(c.u_radius);
  c.large_xi_radius = opt_number(j, "large_xi_radius", w).value_or(c.large_xi_radius);
  c.tolerance = opt_number(j, "tolerance", w).value_or(c.tolerance);
  c.tolerance_strict = opt_number(j, "tolerance_strict", w).value_or(c.tolerance_strict);
  c.u_floor = opt_number(j, "u_floor", w).value_or(c.u_floor);
  try {
    c.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

json sampling_to_json(const SampleConfig& c) {
  return {{"seed", c.seed},           {"count", c.count},
          {"xi_radius", c.xi_radius}, {"u_radius", c.u_radius},
          {"large_xi_radius", c.large_xi_radius}, {"tolerance", c.tolerance},
          {"tolerance_strict", c.tolerance_strict}, {"u_floor", c.u_floor}};
}

ExperimentConfig config_from_json(const json& j) {
  allow_keys(j, {"operator", "rhs", "mesh", "schedule", "newton", "estimates", "sampling", "case",
                 "grids", "linear_presolve"},
             "config");
  ExperimentConfig c;
  if (!j.contains("operator")) config_error("config needs 'operator'");
  c.operator_descriptor = j.at("operator");
  require_object(c.operator_descriptor, "operator");
  if (j.contains("rhs") && !j.at("rhs").is_null()) c.rhs = normalize_rhs(j.at("rhs"));
  if (j.contains("mesh")) {
    c.mesh = get_string(j, "mesh", "config");
    parse_mesh_spec(c.mesh);
  }
  if (j.contains("schedule") && !j.at("schedule").is_null()) {
    c.schedule = get_string(j, "schedule", "config");
    parse_schedule(*c.schedule);
  }
  if (j.contains("newton")) c.newton = newton_from_json(j.at("newton"));
  if (j.contains("estimates")) {
    const json& e = j.at("estimates");
    allow_keys(e, {"rho", "R", "delta"}, "estimates");
    c.rho = opt_number(e, "rho", "estimates");
    c.R = opt_number(e, "R", "estimates");
    c.delta = opt_number(e, "delta", "estimates");
  }
  if (j.contains("sampling")) c.sampling = sampling_from_json(j.at("sampling"));
  if (j.contains("case") && !j.at("case").is_null()) c.mms_case = get_string(j, "case", "config");
  if (j.contains("grids")) {
    c.grids.clear();
    for (double g : number_array(j.at("grids"), "grids")) {
      if (g != std::floor(g)) config_error("grids must be integers");
      c.grids.push_back(static_cast<int>(g));
    }
  }
  if (j.contains("linear_presolve")) {
    if (!j.at("linear_presolve").is_boolean()) config_error("linear_presolve must be a boolean");
    c.linear_presolve = j.at("linear_presolve").get<bool>();
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["operator"] = c.operator_descriptor;
  if (c.rhs) j["rhs"] = *c.rhs;
  j["mesh"] = c.mesh;
  if (c.schedule) j["schedule"] = *c.schedule;
  j["newton"] = newton_to_json(c.newton);
  json e = json::object();
  if (c.rho) e["rho"] = *c.rho;
  if (c.R) e["R"] = *c.R;
  if (c.delta) e["delta"] = *c.delta;
  j["estimates"] = e;
  j["sampling"] = sampling_to_json(c.sampling);
  if (c.mms_case) j["case"] = *c.mms_case;
  j["grids"] = c.grids;
  j["linear_presolve"] = c.linear_presolve;
  return j;
}

}  // namespace pq
