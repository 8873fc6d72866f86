#include "encctl/encctl.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "encctl/config.hpp"
#include "encctl/error.hpp"
#include "encctl/report.hpp"
#include "encctl/selftest.hpp"
#include "encctl/sim.hpp"

struct encctl_config {
  encctl::config::RunConfig cfg;
};

struct encctl_trace {
  encctl::config::RunConfig cfg;
  encctl::sim::SimTrace trace;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
encctl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return ENCCTL_OK;
  } catch (const encctl::Error& e) {
    g_last_error = e.what();
    return static_cast<encctl_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ENCCTL_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return ENCCTL_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  encctl::require(p != nullptr, encctl::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* encctl_version(void) { return "0.1.0"; }

const char* encctl_status_name(encctl_status status) {
  return encctl::error_name(static_cast<encctl::ErrorCode>(status)).data();
}

const char* encctl_last_error(void) { return g_last_error.c_str(); }

void encctl_string_free(char* s) { std::free(s); }

encctl_status encctl_selftest(int* passed, char** report_json) {
  return guarded([&] {
    need(passed, "passed");
    const auto r = encctl::selftest::run();
    *passed = r.pass() ? 1 : 0;
    if (report_json) *report_json = dup_string(encctl::report::selftest_json(r));
  });
}

encctl_status encctl_config_load(const char* path, encctl_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new encctl_config{encctl::config::load(path)};
  });
}

encctl_status encctl_config_parse(const char* json_text, encctl_config** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new encctl_config{encctl::config::parse(json_text)};
  });
}

void encctl_config_free(encctl_config* cfg) { delete cfg; }

encctl_status encctl_config_set_kind(encctl_config* cfg, const char* kind) {
  return guarded([&] {
    need(cfg, "cfg");
    need(kind, "kind");
    const auto k = encctl::sim::parse_kind(kind);
    if (k == encctl::sim::ControllerKind::kPacked) {
      const std::size_t h = cfg->cfg.controller.h(), l = cfg->cfg.controller.l();
      encctl::require(cfg->cfg.bgv.p >= h * std::max(h, l), encctl::ErrorCode::kConfigInvalid,
                      "packed kind needs p >= h max(h, l)");
    }
    cfg->cfg.kind = k;
  });
}

encctl_status encctl_config_set_mode(encctl_config* cfg, const char* mode) {
  return guarded([&] {
    need(cfg, "cfg");
    need(mode, "mode");
    cfg->cfg.mode = encctl::config::parse_mode(mode);
  });
}

encctl_status encctl_config_set_horizon(encctl_config* cfg, size_t T) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.T = T;
  });
}

encctl_status encctl_config_set_seed(encctl_config* cfg, uint64_t seed) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.seed = seed;
  });
}

encctl_status encctl_design(const encctl_config* cfg, int* feasible, char** report_json) {
  return guarded([&] {
    need(cfg, "cfg");
    const auto& c = cfg->cfg;
    const auto r = encctl::design::design(c.plant, c.controller, c.L, c.s, c.bgv.p, c.bgv.N);
    if (feasible) *feasible = r.feasible ? 1 : 0;
    if (report_json) *report_json = dup_string(encctl::report::design_json(r));
  });
}

encctl_status encctl_analyze(const encctl_config* cfg, char** report_json) {
  return guarded([&] {
    need(cfg, "cfg");
    need(report_json, "report_json");
    *report_json = dup_string(encctl::report::cost_json(encctl::report::analyze(cfg->cfg)));
  });
}

encctl_status encctl_simulate(const encctl_config* cfg, encctl_trace** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new encctl_trace{cfg->cfg, encctl::report::simulate(cfg->cfg)};
  });
}

void encctl_trace_free(encctl_trace* trace) { delete trace; }

size_t encctl_trace_length(const encctl_trace* trace) { return trace ? trace->trace.steps.size() : 0; }

encctl_status encctl_trace_write_csv(const encctl_trace* trace, const char* path, int include_wall_time) {
  return guarded([&] {
    need(trace, "trace");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    encctl::require(static_cast<bool>(out), encctl::ErrorCode::kIo, std::string("cannot write '") + path + "'");
    encctl::sim::write_csv(out, trace->trace, include_wall_time != 0);
    encctl::require(static_cast<bool>(out), encctl::ErrorCode::kIo, std::string("write failed for '") + path + "'");
  });
}

encctl_status encctl_trace_summary(const encctl_trace* trace, char** summary_json) {
  return guarded([&] {
    need(trace, "trace");
    need(summary_json, "summary_json");
    *summary_json = dup_string(encctl::report::summary_json(encctl::report::summarize(trace->cfg, trace->trace)));
  });
}

}  // extern "C"
