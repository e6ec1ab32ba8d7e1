#include "pq/pq.h"

#include "pq/io.hpp"
#include "pq/parallel.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

struct pq_operator {
  pq::OperatorPtr op;
};

struct pq_config {
  pq::ExperimentConfig cfg;
  pq::OperatorPtr op;
};

struct pq_trace {
  pq::TraceDocument doc;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_code;

pq_status status_for(pq::ErrorCode code) {
  switch (code) {
    case pq::ErrorCode::NonConvergence:
    case pq::ErrorCode::SingularJacobian:
    case pq::ErrorCode::QuadratureFailure:
      return PQ_NUMERICAL_FAILURE;
    default:
      return PQ_CONFIG_ERROR;
  }
}

pq_status fail(pq_status status, std::string code, std::string message) {
  g_last_code = std::move(code);
  g_last_error = std::move(message);
  return status;
}

// Runs body and converts every exception into a status code.
template <class F>
pq_status guard(F&& body) {
  g_last_error.clear();
  g_last_code.clear();
  try {
    return body();
  } catch (const pq::Error& e) {
    return fail(status_for(e.code()), std::string(pq::to_string(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(PQ_CONFIG_ERROR, "ConfigError", e.what());
  } catch (const std::exception& e) {
    return fail(PQ_NUMERICAL_FAILURE, "Internal", e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pq::json parse_json(const char* text, const char* what) {
  if (text == nullptr) pq::raise(pq::ErrorCode::ConfigError, std::string(what) + " is null");
  try {
    return pq::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    pq::raise(pq::ErrorCode::ConfigError, std::string("malformed ") + what + ": " + e.what());
  }
}

void require(bool cond, const char* message) {
  if (!cond) pq::raise(pq::ErrorCode::InvalidArgument, message);
}

pq::MeshPtr mesh_for(const pq_config& c) {
  const pq::MeshSpec spec = pq::parse_mesh_spec(c.cfg.mesh);
  if (spec.dim != c.op->dim()) {
    pq::raise(pq::ErrorCode::ConfigError, "mesh dimension differs from operator dimension");
  }
  return pq::build_mesh(spec.dim, c.op->domain(), spec.nodes);
}

pq::Rhs rhs_for(const pq_config& c) {
  if (!c.cfg.rhs) pq::raise(pq::ErrorCode::ConfigError, "this run needs a right-hand side (rhs)");
  return pq::rhs_from_json(*c.cfg.rhs, c.op);
}

pq::EpsilonSchedule schedule_for(const pq_config& c) {
  return c.cfg.schedule ? pq::parse_schedule(*c.cfg.schedule) : pq::EpsilonSchedule{};
}

}  // namespace

extern "C" {

const char* pq_version(void) { return "1.0.0"; }
const char* pq_last_error(void) { return g_last_error.c_str(); }
const char* pq_last_error_code(void) { return g_last_code.c_str(); }
void pq_string_free(char* s) { std::free(s); }
void pq_set_threads(unsigned threads) { pq::set_thread_count(threads); }

pq_status pq_operator_from_json(const char* descriptor, pq_operator** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    auto op = pq::operator_from_json(parse_json(descriptor, "operator descriptor"));
    *out = new pq_operator{std::move(op)};
    return PQ_OK;
  });
}

void pq_operator_free(pq_operator* op) { delete op; }

int pq_operator_dim(const pq_operator* op) { return op ? op->op->dim() : 0; }

pq_status pq_operator_flux(const pq_operator* op, const double* x, double u, const double* xi,
                           double* out, size_t n) {
  return guard([&] {
    require(op && x && xi && out, "null argument");
    if (n != static_cast<size_t>(op->op->dim())) {
      pq::raise(pq::ErrorCode::DimensionMismatch, "length differs from operator dimension");
    }
    const int d = op->op->dim();
    const pq::Vector a = op->op->flux(Eigen::Map<const Eigen::VectorXd>(x, d),
                                      u, Eigen::Map<const Eigen::VectorXd>(xi, d));
    for (int i = 0; i < d; ++i) out[i] = a[i];
    return PQ_OK;
  });
}

pq_status pq_operator_dflux_dxi(const pq_operator* op, const double* x, double u,
                                const double* xi, double* out, size_t n) {
  return guard([&] {
    require(op && x && xi && out, "null argument");
    if (n != static_cast<size_t>(op->op->dim())) {
      pq::raise(pq::ErrorCode::DimensionMismatch, "length differs from operator dimension");
    }
    const int d = op->op->dim();
    const pq::Matrix J = op->op->dflux_dxi(Eigen::Map<const Eigen::VectorXd>(x, d), u,
                                           Eigen::Map<const Eigen::VectorXd>(xi, d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) out[i * d + j] = J(i, j);
    }
    return PQ_OK;
  });
}

pq_status pq_operator_regularize(const pq_operator* op, double eps, double eps0, pq_operator** out) {
  return guard([&] {
    require(op && out, "null argument");
    *out = nullptr;
    *out = new pq_operator{pq::regularize(op->op, eps, eps0)};
    return PQ_OK;
  });
}

pq_status pq_config_from_json(const char* text, pq_config** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    const pq::json j = parse_json(text, "config");
    auto cfg = pq::config_from_json(j);
    auto op = pq::operator_from_json(cfg.operator_descriptor);
    if (!j.contains("mesh") && op->dim() == 1) cfg.mesh = "1d:65";
    auto holder = std::make_unique<pq_config>(pq_config{std::move(cfg), std::move(op)});
    // Validate everything a run could need before any computation starts.
    const pq::MeshSpec spec = pq::parse_mesh_spec(holder->cfg.mesh);
    if (spec.dim != holder->op->dim()) {
      pq::raise(pq::ErrorCode::ConfigError, "mesh dimension differs from operator dimension");
    }
    if (holder->cfg.rhs) rhs_for(*holder);
    if (holder->cfg.schedule) schedule_for(*holder).validate(*holder->op);
    *out = holder.release();
    return PQ_OK;
  });
}

void pq_config_free(pq_config* cfg) { delete cfg; }

pq_status pq_config_to_json(const pq_config* cfg, char** out) {
  return guard([&] {
    require(cfg && out, "null argument");
    *out = copy_string(pq::config_to_json(cfg->cfg).dump(2));
    return PQ_OK;
  });
}

pq_status pq_run_check(const pq_config* cfg, char** report_json) {
  return guard([&] {
    require(cfg && report_json, "null argument");
    *report_json = nullptr;
    const pq::AssumptionReport report = pq::run_all_checks(*cfg->op, cfg->cfg.sampling);
    pq::json j = pq::report_to_json(report);
    j["operator"] = cfg->cfg.operator_descriptor;
    j["sampling"] = pq::sampling_to_json(cfg->cfg.sampling);
    *report_json = copy_string(j.dump(2));
    return report.all_pass() ? PQ_OK : PQ_VERIFICATION_FAILED;
  });
}

pq_status pq_run_solve(const pq_config* cfg, char** result_json) {
  return guard([&] {
    require(cfg && result_json, "null argument");
    *result_json = nullptr;
    const pq::MeshPtr mesh = mesh_for(*cfg);
    const pq::Rhs rhs = rhs_for(*cfg);
    pq::DiscreteField U0(mesh);
    if (cfg->cfg.linear_presolve) {
      pq::FamilyParams lin;
      lin.domain = cfg->op->domain();
      U0 = pq::newton_solve(*pq::make_family(pq::Family::PLaplacian, lin), rhs.b, U0,
                            cfg->cfg.newton)
               .U;
    }
    const pq::SolveResult r = pq::newton_solve(*cfg->op, rhs.b, U0, cfg->cfg.newton);
    const double delta = cfg->cfg.delta.value_or(0.1 * mesh->box().min_width());
    const pq::TrackedNorms n = pq::track_norms(r.U, cfg->op->p(), delta);
    pq::json j = pq::field_to_json(r.U);
    j["operator"] = cfg->cfg.operator_descriptor;
    j["rhs"] = rhs.descriptor;
    j["stats"] = {{"method", r.stats.method},
                  {"iterations", r.stats.iterations},
                  {"backtracks", r.stats.backtracks},
                  {"initial_residual", pq::number(r.stats.initial_residual)},
                  {"final_residual", pq::number(r.stats.final_residual)}};
    j["norms"] = {{"lp_grad", pq::number(n.lp_grad)},
                  {"linf_interior", pq::number(n.linf_interior)},
                  {"linf_grad_interior", pq::number(n.linf_grad_interior)},
                  {"h2_interior", pq::number(n.h2_interior)},
                  {"delta", delta}};
    *result_json = copy_string(j.dump(2));
    return PQ_OK;
  });
}

pq_status pq_run_continuation(const pq_config* cfg, pq_trace** out) {
  return guard([&] {
    require(cfg && out, "null argument");
    *out = nullptr;
    const pq::MeshPtr mesh = mesh_for(*cfg);
    const pq::Rhs rhs = rhs_for(*cfg);
    pq::ContinuationConfig cc;
    cc.newton = cfg->cfg.newton;
    cc.linear_presolve = cfg->cfg.linear_presolve;
    cc.delta = cfg->cfg.delta;
    try {
      pq::ContinuationTrace trace =
          pq::continuation_solve(mesh, cfg->op, rhs.b, schedule_for(*cfg), cc);
      *out = new pq_trace{{std::move(trace), cfg->cfg.operator_descriptor, rhs.descriptor,
                           cfg->cfg.newton}};
      return PQ_OK;
    } catch (const pq::ContinuationError& e) {
      *out = new pq_trace{
          {e.partial(), cfg->cfg.operator_descriptor, rhs.descriptor, cfg->cfg.newton}};
      throw;
    }
  });
}

pq_status pq_trace_from_json(const char* text, pq_trace** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    *out = new pq_trace{pq::trace_from_json(parse_json(text, "trace"))};
    return PQ_OK;
  });
}

pq_status pq_trace_to_json(const pq_trace* trace, char** out) {
  return guard([&] {
    require(trace && out, "null argument");
    *out = copy_string(pq::trace_to_json(trace->doc).dump(1));
    return PQ_OK;
  });
}

pq_status pq_trace_to_csv(const pq_trace* trace, char** out) {
  return guard([&] {
    require(trace && out, "null argument");
    *out = copy_string(pq::trace_to_csv(trace->doc.trace));
    return PQ_OK;
  });
}

int pq_trace_steps(const pq_trace* trace) {
  return trace ? static_cast<int>(trace->doc.trace.steps.size()) : 0;
}

void pq_trace_free(pq_trace* trace) { delete trace; }

pq_status pq_run_estimates(const pq_trace* trace, const pq_config* cfg, char** csv,
                           char** summary_json) {
  return guard([&] {
    require(trace && csv && summary_json, "null argument");
    *csv = nullptr;
    *summary_json = nullptr;
    const pq::TraceDocument& doc = trace->doc;
    const pq::OperatorPtr op = pq::operator_from_json(doc.operator_descriptor);
    const pq::Rhs rhs = pq::rhs_from_json(doc.rhs_descriptor, op);
    pq::EstimateConfig ec;
    pq::Balls balls = pq::default_balls(doc.trace.mesh->box());
    if (cfg != nullptr) {
      if (cfg->cfg.rho) balls.rho = *cfg->cfg.rho;
      if (cfg->cfg.R) balls.R = *cfg->cfg.R;
    }
    ec.balls = balls;
    const pq::EstimateReport report = pq::compute_estimates(doc.trace, *op, rhs.b, ec);
    *csv = copy_string(pq::estimates_to_csv(report));
    *summary_json = copy_string(pq::estimates_summary_to_json(report).dump(2));
    return report.pass() ? PQ_OK : PQ_VERIFICATION_FAILED;
  });
}

pq_status pq_run_mms(const pq_config* cfg, char** csv) {
  return guard([&] {
    require(cfg && csv, "null argument");
    *csv = nullptr;
    if (!cfg->cfg.mms_case) pq::raise(pq::ErrorCode::ConfigError, "mms needs a case");
    const pq::Rhs rhs = pq::rhs_from_json(
        pq::json{{"type", "manufactured"}, {"case", *cfg->cfg.mms_case}}, cfg->op);
    const auto rows = pq::convergence_study(cfg->op, *rhs.manufactured, cfg->cfg.grids,
                                            cfg->cfg.newton);
    *csv = copy_string(pq::mms_to_csv(rows));
    return PQ_OK;
  });
}

pq_status pq_report_merge(const char* trace_json, const char* estimates_csv, char** out) {
  return guard([&] {
    require(out != nullptr && estimates_csv != nullptr, "null argument");
    *out = nullptr;
    *out = copy_string(
        pq::report_merge(parse_json(trace_json, "trace"), estimates_csv).dump(2));
    return PQ_OK;
  });
}

}  // extern "C"
