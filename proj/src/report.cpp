#include "encctl/report.hpp"

#include <cmath>

#include "json.hpp"

#include "encctl/error.hpp"

namespace encctl::report {

using nlohmann::ordered_json;

namespace {

ordered_json counters(const bgv::OpCounters& c) {
  return {{"enc", c.enc}, {"dec", c.dec}, {"add", c.add}, {"mult", c.mult}, {"poly_mult", c.poly_mult}};
}

ordered_json storage(const sim::Storage& s) {
  return {{"u", s.u}, {"u_bar", s.u_bar}, {"y", s.y}, {"z", s.z}, {"H", s.H}};
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

std::string design_json(const design::DesignReport& r) {
  ordered_json j;
  j["alpha"] = r.cert.alpha;
  j["gamma"] = r.cert.gamma;
  j["rho"] = r.cert.rho;
  j["K"] = r.cert.K;
  j["beta"] = r.beta;
  j["eps"] = {r.eps[0], r.eps[1], r.eps[2], r.eps[3]};
  j["S"] = r.S;
  j["L"] = r.L;
  j["s"] = r.s;
  j["eps_Ls"] = r.eps_Ls ? ordered_json(*r.eps_Ls) : ordered_json(nullptr);
  j["N_general"] = r.N_general ? ordered_json(to_string(*r.N_general)) : ordered_json(nullptr);
  j["N_packed"] = r.N_packed ? ordered_json(to_string(*r.N_packed)) : ordered_json(nullptr);
  if (r.configured_N_general_ok) j["configured_N_general_ok"] = *r.configured_N_general_ok;
  if (r.configured_N_packed_ok) j["configured_N_packed_ok"] = *r.configured_N_packed_ok;
  j["diagnostics"] = {{"Delta", finite_or_null(r.env.Delta)},
                      {"delta", finite_or_null(r.env.delta)},
                      {"U", finite_or_null(r.env.U)},
                      {"U_hat", finite_or_null(r.env.U_hat)},
                      {"valid", r.env.valid}};
  j["feasible"] = r.feasible;
  j["reason"] = r.reason;
  return j.dump(2);
}

std::string cost_json(const sim::CostReport& c) {
  ordered_json j;
  j["dims"] = {{"n", c.n}, {"h", c.h}, {"l", c.l}, {"p", c.p}};
  j["decomposition"] = {{"nu", c.nu}, {"d", c.d}};
  ordered_json t1;
  t1["general"] = {{"formula", counters(c.general_formula)}, {"storage_formula", storage(c.general_storage_formula)}};
  t1["packed"] = {{"formula", counters(c.packed_formula)}, {"storage_formula", storage(c.packed_storage_formula)}};
  if (c.general_measured) t1["general"]["measured"] = counters(*c.general_measured);
  if (c.general_storage_measured) t1["general"]["storage_measured"] = storage(*c.general_storage_measured);
  if (c.packed_measured) t1["packed"]["measured"] = counters(*c.packed_measured);
  if (c.packed_storage_measured) t1["packed"]["storage_measured"] = storage(*c.packed_storage_measured);
  j["per_step"] = t1;
  ordered_json t2;
  t2["packed"] = {{"poly_mults", c.alg1_poly_mults}, {"comm", c.alg1_comm}};
  if (c.packed_comm_measured) t2["packed"]["comm_measured"] = *c.packed_comm_measured;
  t2["packed_relinearized"] = {{"comm", c.relinearized_comm}};
  t2["rotation_based"] = {{"poly_mults", c.rotation_poly_mults}, {"comm", c.rotation_comm}};
  t2["elementwise_lwe"] = {{"external_products", c.external_products},
                           {"scalar_mults", static_cast<double>(c.external_scalar_mults)},
                           {"comm", c.elementwise_lwe_comm}};
  j["comparison"] = t2;
  j["notes"] = c.notes;
  return j.dump(2);
}

std::string selftest_json(const selftest::Report& r) {
  ordered_json j;
  j["pass"] = r.pass();
  j["checks"] = ordered_json::array();
  for (const auto& c : r.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return j.dump(2);
}

sim::SimTrace simulate(const config::RunConfig& cfg) {
  switch (cfg.kind) {
    case sim::ControllerKind::kNominal:
      return sim::run_nominal(cfg.plant, cfg.controller, cfg.T);
    case sim::ControllerKind::kOracle: {
      const auto t = control::transform(cfg.controller);
      return sim::run_quantized_oracle(cfg.plant, cfg.controller, t, cfg.quant_params(), cfg.T);
    }
    case sim::ControllerKind::kGeneral:
    case sim::ControllerKind::kPacked: {
      const auto t = control::transform(cfg.controller);
      return sim::run_encrypted(cfg.plant, cfg.controller, t, cfg.kind, cfg.encrypted_params(), cfg.T);
    }
  }
  fail(ErrorCode::kInternal, "unhandled controller kind");
}

SimulationSummary summarize(const config::RunConfig& cfg, const sim::SimTrace& trace) {
  SimulationSummary s;
  s.kind = sim::to_string(trace.kind);
  s.steps = trace.steps.size();
  const auto m = sim::error_metrics(trace);
  s.max_err = m.max_err;
  s.max_u_err = m.max_u_err;
  s.sampling_period = cfg.sampling_period;
  double wall = 0;
  for (const auto& r : trace.steps) {
    wall += static_cast<double>(r.wall_ns) * 1e-9;
    if (!r.range_ok) ++s.range_violations;
    s.wrapped += r.wrapped;
  }
  if (!trace.steps.empty()) {
    s.mean_wall_s = wall / static_cast<double>(trace.steps.size());
    s.final_state_norm = control::inf_norm(trace.steps.back().xp);
  }
  try {
    const auto cl = design::closed_loop(cfg.plant, cfg.controller);
    const auto t = control::transform(cfg.controller);
    const auto cert = design::decay_certificate(cl.A);
    const auto eps = design::epsilon_vector(cl, cert, t.M, t.n_bar, t.z0);
    s.eps_Ls = design::epsilon_of(cfg.L, cfg.s, eps);
  } catch (const Error& e) {
    s.eps_reason = e.what();
  }
  return s;
}

std::string summary_json(const SimulationSummary& s) {
  ordered_json j;
  j["kind"] = s.kind;
  j["steps"] = s.steps;
  j["max_err"] = s.max_err;
  j["max_u_err"] = s.max_u_err;
  j["eps_Ls"] = s.eps_Ls ? ordered_json(*s.eps_Ls) : ordered_json(nullptr);
  if (!s.eps_reason.empty()) j["eps_reason"] = s.eps_reason;
  j["mean_step_seconds"] = s.mean_wall_s;
  j["sampling_period"] = s.sampling_period;
  j["range_violations"] = s.range_violations;
  j["wrapped"] = s.wrapped;
  j["final_state_norm"] = s.final_state_norm;
  return j.dump(2);
}

sim::CostReport analyze(const config::RunConfig& cfg, std::size_t measured_steps) {
  const auto t = control::transform(cfg.controller);
  auto c = sim::cost_report(t.n, t.h, t.l, cfg.bgv.p, cfg.bgv.q);
  if (measured_steps == 0) return c;
  auto params = cfg.encrypted_params();
  if (t.n_bar <= cfg.bgv.r_bar) {
    const auto g = sim::run_encrypted(cfg.plant, cfg.controller, t, sim::ControllerKind::kGeneral, params,
                                      measured_steps);
    c.general_measured = sim::per_step_counters(g);
    c.general_storage_measured = g.storage;
  } else {
    c.notes.push_back("general controller not measured: n(h+l) exceeds r_bar");
  }
  const auto p = sim::run_encrypted(cfg.plant, cfg.controller, t, sim::ControllerKind::kPacked, params,
                                    measured_steps);
  c.packed_measured = sim::per_step_counters(p);
  c.packed_storage_measured = p.storage;
  c.packed_comm_measured = p.steps.front().comm_integers;
  return c;
}

}  // namespace encctl::report
