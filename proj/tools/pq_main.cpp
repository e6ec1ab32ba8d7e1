// pq: command-line front end for the p,q-growth workbench.
//
//   pq check        --operator op.json --samples N --seed S --out report.json
//   pq solve        --operator op.json --rhs rhs.json --mesh 2d:65x65 --out solution.json
//   pq continuation --operator op.json --rhs ... --schedule "eps0=0.2,ratio=0.5,steps=5"
//                   --out trace.json            (also writes trace.csv)
//   pq estimates    --trace trace.json --rho 0.25 --R 0.4 --out estimates.csv
//                                               (also writes estimates.json)
//   pq mms          --operator op.json --case sine2d --grids 9,17,33,65 --out mms.csv
//   pq report       --trace trace.json --estimates estimates.csv --out summary.json
//
// Exit codes: 0 ok, 1 verification failure, 2 numerical failure, 3 configuration error.
#include "pq/pq.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kConfigError = PQ_CONFIG_ERROR;

struct ConfigFailure {
  std::string message;
};

struct Options {
  std::string config_file;
  std::string operator_arg;
  std::string rhs;
  std::string mesh;
  std::string schedule;
  std::string trace;
  std::string estimates;
  std::string mms_case;
  std::string grids;
  std::string out;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho;
  std::optional<double> R;
  std::optional<double> delta;
  std::optional<double> newton_tol;
  unsigned threads = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFailure{"cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigFailure{"malformed JSON in " + what + ": " + e.what()};
  }
}

// Inline JSON if it looks like an object, a file path otherwise.
json json_argument(const std::string& arg, const std::string& what) {
  if (!arg.empty() && arg.front() == '{') return parse_json_text(arg, what);
  return parse_json_text(read_file(arg), what + " '" + arg + "'");
}

// rhs may be a file holding JSON, inline JSON, or a spec string like "constant:-2".
json rhs_argument(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return parse_json_text(arg, "--rhs");
  if (fs::exists(arg)) return parse_json_text(read_file(arg), "rhs file '" + arg + "'");
  return arg;
}

std::vector<int> parse_grids(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigFailure{"--grids must be a comma-separated list of integers"};
    }
  }
  return out;
}

json build_config(const Options& o) {
  json cfg = o.config_file.empty() ? json::object()
                                   : parse_json_text(read_file(o.config_file), "--config");
  if (!cfg.is_object()) throw ConfigFailure{"--config must hold a JSON object"};
  if (!o.operator_arg.empty()) cfg["operator"] = json_argument(o.operator_arg, "--operator");
  if (!o.rhs.empty()) cfg["rhs"] = rhs_argument(o.rhs);
  if (!o.mesh.empty()) cfg["mesh"] = o.mesh;
  if (!o.schedule.empty()) cfg["schedule"] = o.schedule;
  if (!o.mms_case.empty()) cfg["case"] = o.mms_case;
  if (!o.grids.empty()) cfg["grids"] = parse_grids(o.grids);
  if (o.samples) cfg["sampling"]["count"] = *o.samples;
  if (o.seed) cfg["sampling"]["seed"] = *o.seed;
  if (o.rho) cfg["estimates"]["rho"] = *o.rho;
  if (o.R) cfg["estimates"]["R"] = *o.R;
  if (o.delta) cfg["estimates"]["delta"] = *o.delta;
  if (o.newton_tol) cfg["newton"]["abs_tol"] = *o.newton_tol;
  if (!cfg.contains("operator")) throw ConfigFailure{"an operator is required (--operator)"};
  return cfg;
}

// Write to a temporary sibling, then rename over the target.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

fs::path sibling(const fs::path& path, const std::string& ext) {
  fs::path s = path;
  s.replace_extension(ext);
  return s;
}

struct CString {
  char* p = nullptr;
  ~CString() { pq_string_free(p); }
  [[nodiscard]] std::string str() const { return p ? std::string(p) : std::string(); }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};
using ConfigHandle = Handle<pq_config, pq_config_free>;
using TraceHandle = Handle<pq_trace, pq_trace_free>;

int report(pq_status s) {
  if (s != PQ_OK) {
    const std::string msg = pq_last_error();
    if (!msg.empty()) std::cerr << "pq: " << msg << "\n";
  }
  return static_cast<int>(s);
}

std::string default_out(const std::string& out, const char* fallback) {
  return out.empty() ? std::string(fallback) : out;
}

int load_config(const Options& o, ConfigHandle& cfg) {
  const std::string text = build_config(o).dump();
  return report(pq_config_from_json(text.c_str(), &cfg.p));
}

int run_check(const Options& o) {
  ConfigHandle cfg;
  if (int rc = load_config(o, cfg)) return rc;
  CString out;
  const pq_status s = pq_run_check(cfg.p, &out.p);
  if (out.p) write_atomic(default_out(o.out, "report.json"), out.str() + "\n");
  if (s == PQ_VERIFICATION_FAILED) std::cerr << "pq: one or more structural checks failed\n";
  return report(s);
}

int run_solve(const Options& o) {
  ConfigHandle cfg;
  if (int rc = load_config(o, cfg)) return rc;
  CString out;
  const pq_status s = pq_run_solve(cfg.p, &out.p);
  if (out.p) write_atomic(default_out(o.out, "solution.json"), out.str() + "\n");
  return report(s);
}

int run_continuation(const Options& o) {
  ConfigHandle cfg;
  if (int rc = load_config(o, cfg)) return rc;
  TraceHandle trace;
  const pq_status s = pq_run_continuation(cfg.p, &trace.p);
  const std::string err = pq_last_error();
  if (trace.p) {
    const fs::path path = default_out(o.out, "trace.json");
    CString j, c;
    if (pq_trace_to_json(trace.p, &j.p) != PQ_OK || pq_trace_to_csv(trace.p, &c.p) != PQ_OK) {
      return report(PQ_NUMERICAL_FAILURE);
    }
    write_atomic(path, j.str() + "\n");
    write_atomic(sibling(path, ".csv"), c.str());
  }
  if (s != PQ_OK) std::cerr << "pq: " << err << "\n";
  return static_cast<int>(s);
}

int run_estimates(const Options& o) {
  if (o.trace.empty()) throw ConfigFailure{"estimates needs --trace"};
  const std::string text = read_file(o.trace);
  TraceHandle trace;
  if (int rc = report(pq_trace_from_json(text.c_str(), &trace.p))) return rc;

  // Only estimate parameters come from the command line here; the operator
  // and right-hand side are taken from the trace.
  json cfg_json = json::parse(text).at("operator");
  json cfg = {{"operator", cfg_json}};
  if (o.rho) cfg["estimates"]["rho"] = *o.rho;
  if (o.R) cfg["estimates"]["R"] = *o.R;
  if (o.delta) cfg["estimates"]["delta"] = *o.delta;
  ConfigHandle handle;
  if (int rc = report(pq_config_from_json(cfg.dump().c_str(), &handle.p))) return rc;

  CString csv, summary;
  const pq_status s = pq_run_estimates(trace.p, handle.p, &csv.p, &summary.p);
  if (csv.p && summary.p) {
    const fs::path path = default_out(o.out, "estimates.csv");
    write_atomic(path, csv.str());
    write_atomic(sibling(path, ".json"), summary.str() + "\n");
  }
  if (s == PQ_VERIFICATION_FAILED) std::cerr << "pq: uniformity verdict failed\n";
  return report(s);
}

int run_mms(const Options& o) {
  ConfigHandle cfg;
  if (int rc = load_config(o, cfg)) return rc;
  CString csv;
  const pq_status s = pq_run_mms(cfg.p, &csv.p);
  if (csv.p) write_atomic(default_out(o.out, "mms.csv"), csv.str());
  return report(s);
}

int run_report(const Options& o) {
  if (o.trace.empty() || o.estimates.empty()) {
    throw ConfigFailure{"report needs --trace and --estimates"};
  }
  const std::string trace = read_file(o.trace);
  const std::string estimates = read_file(o.estimates);
  CString out;
  const pq_status s = pq_report_merge(trace.c_str(), estimates.c_str(), &out.p);
  if (out.p) write_atomic(default_out(o.out, "summary.json"), out.str() + "\n");
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p,q-growth elliptic solver and verification workbench"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_file, "Experiment config JSON file");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_option("--out", o.out, "Output file");
  };
  auto add_operator = [&](CLI::App* sub) {
    sub->add_option("--operator", o.operator_arg, "Operator descriptor (file or inline JSON)");
  };
  auto add_solve = [&](CLI::App* sub) {
    sub->add_option("--rhs", o.rhs, "Right-hand side: file, inline JSON, constant:v, manufactured:case");
    sub->add_option("--mesh", o.mesh, "Mesh spec, e.g. 2d:65x65");
    sub->add_option("--newton-tol", o.newton_tol, "Newton absolute residual tolerance");
    sub->add_option("--delta", o.delta, "Interior distance for local norms");
  };

  auto* check = app.add_subcommand("check", "Sampled verification of the structural conditions");
  add_common(check);
  add_operator(check);
  check->add_option("--samples", o.samples, "Random samples per check");
  check->add_option("--seed", o.seed, "Sampling seed");

  auto* solve = app.add_subcommand("solve", "Newton solve of the discrete problem");
  add_common(solve);
  add_operator(solve);
  add_solve(solve);

  auto* cont = app.add_subcommand("continuation", "Epsilon-continuation with tracked norms");
  add_common(cont);
  add_operator(cont);
  add_solve(cont);
  cont->add_option("--schedule", o.schedule, "eps0=..,ratio=..,steps=..");

  auto* est = app.add_subcommand("estimates", "A priori estimate instrumentation on a trace");
  add_common(est);
  est->add_option("--trace", o.trace, "trace.json from 'pq continuation'");
  est->add_option("--rho", o.rho, "Inner ball radius");
  est->add_option("--R", o.R, "Outer ball radius");
  est->add_option("--delta", o.delta, "Interior distance (recorded only)");

  auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
  add_common(mms);
  add_operator(mms);
  mms->add_option("--case", o.mms_case, "Manufactured case name");
  mms->add_option("--grids", o.grids, "Comma-separated nodes per axis, e.g. 9,17,33,65");
  mms->add_option("--newton-tol", o.newton_tol, "Newton absolute residual tolerance");

  auto* rep = app.add_subcommand("report", "Merge a trace and an estimates CSV into one summary");
  add_common(rep);
  rep->add_option("--trace", o.trace, "trace.json");
  rep->add_option("--estimates", o.estimates, "estimates.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  pq_set_threads(o.threads);
  try {
    if (check->parsed()) return run_check(o);
    if (solve->parsed()) return run_solve(o);
    if (cont->parsed()) return run_continuation(o);
    if (est->parsed()) return run_estimates(o);
    if (mms->parsed()) return run_mms(o);
    if (rep->parsed()) return run_report(o);
  } catch (const ConfigFailure& e) {
    std::cerr << "pq: ConfigError: " << e.message << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "pq: " << e.what() << "\n";
    return PQ_NUMERICAL_FAILURE;
  }
  return kConfigError;
}
