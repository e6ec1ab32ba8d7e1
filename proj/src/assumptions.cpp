#include "pq/verify.hpp"

#include <algorithm>
#include <cmath>

namespace pq {

bool AssumptionReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.pass; });
}

const ReportEntry* AssumptionReport::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

void AssumptionReport::append(const AssumptionReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

namespace {

ReportEntry slack_entry(std::string id, double slack, bool strict, std::string note) {
  ReportEntry e;
  e.id = std::move(id);
  e.worst_margin = slack;
  e.pass = strict ? slack > 0.0 : slack >= 0.0;
  e.note = std::move(note);
  return e;
}

}  // namespace

AssumptionReport validate_assumptions(const StructuralConstants& c, int n, double gamma,
                                      double s0) {
  const double p = c.p;
  const double q = c.q;
  AssumptionReport r;
  r.entries.push_back(slack_entry("p_ge_2", p - 2.0, false, "2 <= p"));
  r.entries.push_back(slack_entry("q_ge_p", q - p, false, "p <= q"));
  r.entries.push_back(slack_entry("q_lt_p_plus_1", p + 1.0 - q, true, "q < p + 1"));
  r.entries.push_back(
      slack_entry("q_over_p_bound", 1.0 + 1.0 / n - q / p, true, "q/p < 1 + 1/n"));

  const double alpha_max = 2.0 * (q - 2.0) / (q - p + 2.0);
  r.entries.push_back(slack_entry("alpha_range",
                                  std::min(c.growth_alpha, alpha_max - c.growth_alpha), false,
                                  "0 <= alpha <= 2(q-2)/(q-p+2)"));

  // Lower end is non-strict, upper end strict: fold both into one slack but
  // keep the strictness of the upper end.
  ReportEntry beta = slack_entry("beta_range", std::min(c.beta, p - 1.0 - c.beta), false,
                                 "0 <= beta < p - 1");
  beta.pass = c.beta >= 0.0 && c.beta < p - 1.0;
  r.entries.push_back(beta);

  r.entries.push_back(
      slack_entry("gamma_bound", gamma - n / (p - 1.0), true, "gamma > n/(p-1)"));
  r.entries.push_back(slack_entry("s0_bound", s0 - n, true, "s0 > n"));
  return r;
}

}  // namespace pq
