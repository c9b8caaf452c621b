#include "fracvar/report.hpp"

#include <cmath>

namespace fracvar {

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const TailReport& tail) {
  Json j;
  j["schedule"] = tail.schedule;
  Json s = Json::array();
  for (double v : tail.s_values) s.push_back(num(v));
  j["s_values"] = s;
  j["trend_decreasing"] = tail.trend_decreasing;
  j["approximate"] = tail.approximate;
  return j;
}

Json to_json(const TransversalityReport& rep) {
  Json j;
  j["case"] = std::string(case_tag_name(rep.case_tag));
  if (rep.R1) j["R1"] = num(*rep.R1);
  if (rep.R2) j["R2"] = num(*rep.R2);
  if (rep.kkt_sign_ok) j["kkt_sign_ok"] = *rep.kkt_sign_ok;
  if (rep.complementarity) j["complementarity"] = num(*rep.complementarity);
  if (rep.constraint_active) j["constraint_active"] = *rep.constraint_active;
  j["I_term"] = num(rep.I_term);
  j["xprime_T"] = num(rep.xprime_T);
  j["d3l_kink_flagged"] = rep.d3l_kink_flagged;
  if (rep.tail) j["tail"] = to_json(*rep.tail);
  return j;
}

Json to_json(const TraceEntry& e) {
  Json j;
  j["phase"] = e.phase;
  j["T"] = num(e.T);
  j["J"] = num(e.J);
  j["grad_norm"] = num(e.grad_norm);
  j["dJ_dT"] = num(e.dJ_dT);
  j["best_J"] = num(e.best_J);
  j["inner_converged"] = e.inner_converged;
  return j;
}

Json to_json(const KktRecord& k) {
  Json j;
  j["constraint"] = k.constraint;
  j["active"] = k.active;
  j["multiplier"] = num(k.multiplier);
  j["complementarity"] = num(k.complementarity);
  j["sign_ok"] = k.sign_ok;
  return j;
}

Json to_json(const VariationalProblem& p, const SolverOptions& opts, const SolverReport& rep) {
  Json j;
  Json prob;
  prob["terminal_kind"] = std::string(terminal_kind_name(p.terminal()));
  prob["sense"] = std::string(sense_name(p.sense()));
  prob["alpha"] = p.alpha();
  prob["a"] = p.a();
  prob["b"] = p.b();
  prob["x_a"] = p.x_a();
  prob["lagrangian"] = p.lagrangian().str();
  j["problem"] = prob;

  Json o;
  o["n_nodes"] = opts.n_nodes;
  o["max_outer_iters"] = opts.max_outer_iters;
  o["max_inner_iters"] = opts.max_inner_iters;
  o["grad_tol"] = opts.grad_tol;
  o["T_tol"] = opts.T_tol;
  o["perturbation_seed"] = opts.perturbation_seed;
  j["options"] = o;

  j["converged"] = rep.converged;
  j["T_star"] = num(rep.T_star);
  j["objective"] = num(rep.objective);
  j["grad_norm"] = num(rep.grad_norm);
  j["dJ_dT"] = num(rep.dJ_dT);
  j["el_interior_sup"] = num(rep.el_interior_sup);
  j["el_error_estimate"] = num(rep.el_error_estimate);
  j["residuals"] = to_json(rep.residuals);
  j["kkt"] = rep.kkt ? to_json(*rep.kkt) : Json(nullptr);
  Json trace = Json::array();
  for (const auto& e : rep.trace) trace.push_back(to_json(e));
  j["trace"] = trace;
  j["notes"] = rep.notes;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace fracvar
