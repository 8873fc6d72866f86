#pragma once

// JSON renderings of design, cost and simulation results.

#include <optional>
#include <string>

#include "encctl/config.hpp"
#include "encctl/design.hpp"
#include "encctl/selftest.hpp"
#include "encctl/sim.hpp"

namespace encctl::report {

std::string design_json(const design::DesignReport& r);
std::string cost_json(const sim::CostReport& c);
std::string selftest_json(const selftest::Report& r);

struct SimulationSummary {
  std::string kind;
  std::size_t steps = 0;
  double max_err = 0;
  double max_u_err = 0;
  std::optional<double> eps_Ls;  // empty when 1/s <= eps0
  std::string eps_reason;
  double mean_wall_s = 0;
  double sampling_period = 0;
  std::size_t range_violations = 0;
  std::size_t wrapped = 0;
  double final_state_norm = 0;
};

SimulationSummary summarize(const config::RunConfig& cfg, const sim::SimTrace& trace);
std::string summary_json(const SimulationSummary& s);

/// Runs the configured controller kind for cfg.T steps.
sim::SimTrace simulate(const config::RunConfig& cfg);
/// Cost report with counters measured over a short run of both encrypted kinds.
sim::CostReport analyze(const config::RunConfig& cfg, std::size_t measured_steps = 2);

}  // namespace encctl::report
