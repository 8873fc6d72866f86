// Command-line front end over the C API.
//
//   encctl selftest
//   encctl design   --config f16.json
//   encctl simulate --config f16.json [--kind packed] [--T 200] [--seed 1]
//                   [--mode strict] [--out trace.csv] [--no-wall-time]
//   encctl analyze  --config f16.json
//
// Exit codes: 0 ok, 1 other failure, 2 invalid config, 3 infeasible design,
// 4 range violation at run time. ENCCTL_LOG_LEVEL=quiet|info|debug.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "encctl/encctl.h"

namespace {

enum Exit { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitInfeasible = 3, kExitRange = 4 };

enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel log_level() {
  const char* v = std::getenv("ENCCTL_LOG_LEVEL");
  if (!v) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "quiet") return LogLevel::kQuiet;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log(LogLevel level, const std::string& msg) {
  const LogLevel current = log_level();
  if (current != LogLevel::kQuiet && static_cast<int>(level) <= static_cast<int>(current)) std::cerr << msg << '\n';
}

int exit_for(encctl_status st) {
  switch (st) {
    case ENCCTL_OK: return kExitOk;
    case ENCCTL_CONFIG_INVALID:
    case ENCCTL_IO:
    case ENCCTL_DIM_MISMATCH:
    case ENCCTL_INVALID_PARAMS:
    case ENCCTL_NOT_OBSERVABLE:
    case ENCCTL_NOT_CONTROLLABLE:
    case ENCCTL_TOO_MANY_TERMS:
      return kExitConfig;
    case ENCCTL_S_INVALID:
    case ENCCTL_UNSTABLE:
      return kExitInfeasible;
    case ENCCTL_RANGE_EXCEEDED: return kExitRange;
    default: return kExitFailure;
  }
}

int report_error(encctl_status st) {
  std::cerr << "error: " << encctl_last_error() << '\n';
  return exit_for(st);
}

struct Owned {
  char* s = nullptr;
  ~Owned() { encctl_string_free(s); }
};

struct ConfigHandle {
  encctl_config* c = nullptr;
  ~ConfigHandle() { encctl_config_free(c); }
};

struct TraceHandle {
  encctl_trace* t = nullptr;
  ~TraceHandle() { encctl_trace_free(t); }
};

int cmd_selftest() {
  int passed = 0;
  Owned json;
  const auto st = encctl_selftest(&passed, &json.s);
  if (st != ENCCTL_OK) return report_error(st);
  std::cout << json.s << '\n';
  return passed ? kExitOk : kExitFailure;
}

int cmd_design(const std::string& path) {
  ConfigHandle cfg;
  if (auto st = encctl_config_load(path.c_str(), &cfg.c); st != ENCCTL_OK) return report_error(st);
  int feasible = 0;
  Owned json;
  if (auto st = encctl_design(cfg.c, &feasible, &json.s); st != ENCCTL_OK) return report_error(st);
  std::cout << json.s << '\n';
  return feasible ? kExitOk : kExitInfeasible;
}

struct SimulateOptions {
  std::string config;
  std::optional<std::string> kind;
  std::optional<std::size_t> T;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::string out;
  bool no_wall_time = false;
};

int cmd_simulate(const SimulateOptions& o) {
  ConfigHandle cfg;
  if (auto st = encctl_config_load(o.config.c_str(), &cfg.c); st != ENCCTL_OK) return report_error(st);
  encctl_status st = ENCCTL_OK;
  if (o.kind && (st = encctl_config_set_kind(cfg.c, o.kind->c_str())) != ENCCTL_OK) return report_error(st);
  if (o.mode && (st = encctl_config_set_mode(cfg.c, o.mode->c_str())) != ENCCTL_OK) return report_error(st);
  if (o.T && (st = encctl_config_set_horizon(cfg.c, *o.T)) != ENCCTL_OK) return report_error(st);
  if (o.seed && (st = encctl_config_set_seed(cfg.c, *o.seed)) != ENCCTL_OK) return report_error(st);
  log(LogLevel::kDebug, "simulating " + o.config);
  TraceHandle trace;
  if ((st = encctl_simulate(cfg.c, &trace.t)) != ENCCTL_OK) return report_error(st);
  if (!o.out.empty()) {
    if ((st = encctl_trace_write_csv(trace.t, o.out.c_str(), o.no_wall_time ? 0 : 1)) != ENCCTL_OK)
      return report_error(st);
    log(LogLevel::kInfo, "wrote " + std::to_string(encctl_trace_length(trace.t)) + " steps to " + o.out);
  }
  Owned json;
  if ((st = encctl_trace_summary(trace.t, &json.s)) != ENCCTL_OK) return report_error(st);
  std::cout << json.s << '\n';
  const auto summary = nlohmann::json::parse(json.s);
  const auto wrapped = summary.value("wrapped", 0ULL), violations = summary.value("range_violations", 0ULL);
  if (wrapped > 0 || violations > 0) {
    log(LogLevel::kInfo, "warning: " + std::to_string(violations) + " steps violated the modulus condition, " +
                             std::to_string(wrapped) + " quantized entries wrapped");
  }
  return kExitOk;
}

int cmd_analyze(const std::string& path) {
  ConfigHandle cfg;
  if (auto st = encctl_config_load(path.c_str(), &cfg.c); st != ENCCTL_OK) return report_error(st);
  Owned json;
  if (auto st = encctl_analyze(cfg.c, &json.s); st != ENCCTL_OK) return report_error(st);
  std::cout << json.s << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted dynamic controller toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(encctl_version()));

  auto* selftest = app.add_subcommand("selftest", "Check the packing golden vectors");

  std::string design_config;
  auto* design = app.add_subcommand("design", "Error budget and minimum plaintext modulus");
  design->add_option("--config", design_config, "Run configuration (JSON)")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop simulation");
  simulate->add_option("--config", sim.config, "Run configuration (JSON)")->required();
  simulate->add_option("--kind", sim.kind, "nominal | oracle | general | packed");
  simulate->add_option("--T", sim.T, "Horizon in steps");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--mode", sim.mode, "strict | wraparound-demo");
  simulate->add_option("--out", sim.out, "CSV trace path");
  simulate->add_flag("--no-wall-time", sim.no_wall_time, "Write zeros in the wall_ns column");

  std::string analyze_config;
  auto* analyze = app.add_subcommand("analyze", "Per-step operation counts and communication");
  analyze->add_option("--config", analyze_config, "Run configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*selftest) return cmd_selftest();
  if (*design) return cmd_design(design_config);
  if (*simulate) return cmd_simulate(sim);
  if (*analyze) return cmd_analyze(analyze_config);
  return kExitFailure;
}
