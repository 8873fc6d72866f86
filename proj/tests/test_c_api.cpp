#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "encctl/encctl.h"

namespace {

std::string src(const char* rel) { return std::string(ENCCTL_SOURCE_DIR) + "/" + rel; }

struct Str {
  char* s = nullptr;
  ~Str() { encctl_string_free(s); }
};

struct Cfg {
  encctl_config* c = nullptr;
  ~Cfg() { encctl_config_free(c); }
};

struct Trace {
  encctl_trace* t = nullptr;
  ~Trace() { encctl_trace_free(t); }
};

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(encctl_version(), "0.1.0");
  EXPECT_STREQ(encctl_status_name(ENCCTL_OK), "Ok");
  EXPECT_STREQ(encctl_status_name(ENCCTL_S_INVALID), "SInvalid");
  EXPECT_STREQ(encctl_status_name(ENCCTL_RANGE_EXCEEDED), "RangeExceeded");
}

TEST(CApi, SelfTest) {
  int passed = 0;
  Str json;
  ASSERT_EQ(encctl_selftest(&passed, &json.s), ENCCTL_OK);
  EXPECT_EQ(passed, 1);
  const auto j = nlohmann::json::parse(json.s);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["checks"].size(), 7u);
}

TEST(CApi, NullArgumentsAndMissingFile) {
  EXPECT_EQ(encctl_selftest(nullptr, nullptr), ENCCTL_INVALID_ARGUMENT);
  EXPECT_NE(std::string(encctl_last_error()).find("null"), std::string::npos);
  Cfg cfg;
  EXPECT_EQ(encctl_config_load("/nonexistent.json", &cfg.c), ENCCTL_IO);
  EXPECT_EQ(cfg.c, nullptr);
  EXPECT_EQ(encctl_config_parse("{", &cfg.c), ENCCTL_CONFIG_INVALID);
  EXPECT_EQ(encctl_trace_length(nullptr), 0u);
}

TEST(CApi, F16DesignIsInfeasible) {
  Cfg cfg;
  ASSERT_EQ(encctl_config_load(src("configs/f16.json").c_str(), &cfg.c), ENCCTL_OK);
  int feasible = -1;
  Str json;
  ASSERT_EQ(encctl_design(cfg.c, &feasible, &json.s), ENCCTL_OK);
  EXPECT_EQ(feasible, 0);
  const auto j = nlohmann::json::parse(json.s);
  EXPECT_TRUE(j["eps_Ls"].is_null());
  EXPECT_EQ(j["K"].get<int>(), 81);
}

TEST(CApi, ToySimulateAndCsv) {
  Cfg cfg;
  ASSERT_EQ(encctl_config_load(src("configs/toy.json").c_str(), &cfg.c), ENCCTL_OK);
  ASSERT_EQ(encctl_config_set_horizon(cfg.c, 12), ENCCTL_OK);
  ASSERT_EQ(encctl_config_set_kind(cfg.c, "general"), ENCCTL_OK);
  EXPECT_EQ(encctl_config_set_kind(cfg.c, "bogus"), ENCCTL_CONFIG_INVALID);
  EXPECT_EQ(encctl_config_set_mode(cfg.c, "bogus"), ENCCTL_CONFIG_INVALID);
  Trace tr;
  ASSERT_EQ(encctl_simulate(cfg.c, &tr.t), ENCCTL_OK) << encctl_last_error();
  EXPECT_EQ(encctl_trace_length(tr.t), 12u);
  const std::string path = ::testing::TempDir() + "encctl_capi_trace.csv";
  ASSERT_EQ(encctl_trace_write_csv(tr.t, path.c_str(), 0), ENCCTL_OK);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("k,u_1,y_1", 0), 0u);
  std::remove(path.c_str());
  Str summary;
  ASSERT_EQ(encctl_trace_summary(tr.t, &summary.s), ENCCTL_OK);
  const auto j = nlohmann::json::parse(summary.s);
  EXPECT_EQ(j["kind"], "general");
  EXPECT_EQ(j["steps"], 12);
  EXPECT_EQ(j["range_violations"], 0);
  EXPECT_FALSE(j["eps_Ls"].is_null());
  EXPECT_EQ(encctl_trace_write_csv(tr.t, "/nonexistent/dir/x.csv", 0), ENCCTL_IO);
}

TEST(CApi, AnalyzeToy) {
  Cfg cfg;
  ASSERT_EQ(encctl_config_load(src("configs/toy.json").c_str(), &cfg.c), ENCCTL_OK);
  Str json;
  ASSERT_EQ(encctl_analyze(cfg.c, &json.s), ENCCTL_OK) << encctl_last_error();
  const auto j = nlohmann::json::parse(json.s);
  const auto& g = j["per_step"]["general"];
  EXPECT_EQ(g["formula"], g["measured"]);
  const auto& p = j["per_step"]["packed"];
  EXPECT_EQ(p["formula"], p["measured"]);
  EXPECT_EQ(j["comparison"]["packed"]["comm_measured"], 7 * 4);
}
