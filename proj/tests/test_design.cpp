#include <gtest/gtest.h>

#include "encctl/design.hpp"
#include "encctl/enc_packed.hpp"
#include "encctl/error.hpp"
#include "test_support.hpp"

using namespace encctl;
using namespace encctl::design;

namespace {
constexpr double kRelTol = 1e-9;

void expect_rel(double got, double want, double tol = kRelTol) {
  EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << got << " vs " << want;
}
}  // namespace

TEST(DesignF16, CertificateMatchesReference) {
  const auto cfg = encctl::testing::f16_config();
  const auto& ref = encctl::testing::f16_reference();
  const auto model = closed_loop(cfg.plant, cfg.controller);
  const auto cert = decay_certificate(model.A);
  expect_rel(cert.rho, ref["rho"].get<double>());
  expect_rel(cert.gamma, ref["gamma"].get<double>());
  EXPECT_EQ(cert.K, ref["K"].get<std::size_t>());
  expect_rel(cert.alpha, ref["alpha"].get<double>());
  EXPECT_GE(cert.verified, cert.K);
  const auto t = control::transform(cfg.controller);
  expect_rel(beta_of(model, cert), ref["beta"].get<double>());
  expect_rel(bound_S(model, cert), ref["S"].get<double>());
  const auto eps = epsilon_vector(model, cert, t.M, t.n_bar, t.z0);
  for (int i = 0; i < 4; ++i) expect_rel(eps[i], ref["eps"][i].get<double>());
}

TEST(DesignF16, ConfiguredQuantizationIsInfeasible) {
  const auto cfg = encctl::testing::f16_config();
  const auto r = design::design(cfg.plant, cfg.controller, cfg.L, cfg.s, cfg.bgv.p, cfg.bgv.N);
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(r.eps_Ls.has_value());
  EXPECT_NE(r.reason.find("SInvalid"), std::string::npos);
  EXPECT_FALSE(r.env.valid);
}

TEST(Design, EpsilonOfFormula) {
  const EpsilonVector e{10, 1, 2, 3};
  // (1 * 0.1 + 2 * 0.1 * 0.01 + 3 * 0.01) / (1 - 10 * 0.01)
  EXPECT_DOUBLE_EQ(epsilon_of(0.1, 0.01, e), (0.1 + 0.002 + 0.03) / 0.9);
  try {
    epsilon_of(0.1, 0.1, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kSInvalid);
  }
}

TEST(Design, NextNttPrime) {
  EXPECT_EQ(next_ntt_prime(100, 4), u128(113));  // 105 = 3 * 5 * 7
  EXPECT_EQ(next_ntt_prime(16, 4), u128(17));
  EXPECT_EQ(next_ntt_prime(17, 4), u128(41));   // strictly above; 25 and 33 composite
  EXPECT_THROW(next_ntt_prime(std::numeric_limits<double>::infinity(), 4), Error);
}

TEST(Design, UnstableLoopRejected) {
  Mat A(1, 1);
  A << 1.5;
  try {
    decay_certificate(A);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnstable);
  }
}

TEST(Design, ScalarCertificateIsExact) {
  // A = 0.5: rho = 0.5, gamma = 0.75, ||A^k|| <= gamma^k from k = 1, alpha = 1.
  Mat A(1, 1);
  A << 0.5;
  const auto c = decay_certificate(A);
  EXPECT_DOUBLE_EQ(c.rho, 0.5);
  EXPECT_DOUBLE_EQ(c.gamma, 0.75);
  EXPECT_EQ(c.K, 1u);
  EXPECT_DOUBLE_EQ(c.alpha, 1.0);
}

TEST(DesignToy, FeasibleAndMinimal) {
  const auto cfg = encctl::testing::toy_config();
  const auto r = design::design(cfg.plant, cfg.controller, cfg.L, cfg.s, cfg.bgv.p, cfg.bgv.N);
  ASSERT_TRUE(r.feasible) << r.reason;
  ASSERT_TRUE(r.N_general && r.N_packed);
  EXPECT_TRUE(r.env.valid);
  // Minimality: N is prime, N = 1 mod 2p, and clears the condition.
  const auto t = control::transform(cfg.controller);
  const double lhs = general_modulus_lhs(cfg.L, cfg.s, r.eps, r.S, t.z0);
  EXPECT_LT(lhs, static_cast<double>(*r.N_general) / 2);
  EXPECT_EQ(*r.N_general % (2 * cfg.bgv.p), u128(1));
  EXPECT_TRUE(is_probable_prime(*r.N_general));
  EXPECT_EQ(*r.N_general, next_ntt_prime(2 * lhs, cfg.bgv.p));
  // The configured N was chosen as the general minimum.
  EXPECT_EQ(*r.N_general, cfg.bgv.N);
  EXPECT_TRUE(*r.configured_N_general_ok);
  EXPECT_TRUE(*r.configured_N_packed_ok);
}

TEST(DesignToy, TooSmallConfiguredModulus) {
  const auto cfg = encctl::testing::toy_config();
  const auto r = design::design(cfg.plant, cfg.controller, cfg.L, cfg.s, cfg.bgv.p, u128(1009));
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(*r.configured_N_general_ok);
}

TEST(Design, PackedModulusUsesBlockSums) {
  // Two 1x1 blocks [2] and [-3]: the padded sum is -1, so the gain factor is 1/s + n.
  const EpsilonVector e{0, 0, 0, 0};
  Vec z0(2);
  z0 << 0.25, -0.5;
  std::vector<Mat> blocks{Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, -3.0)};
  const double lhs = packed_modulus_lhs(0.5, 0.5, e, 0.0, z0, blocks, 1);
  EXPECT_DOUBLE_EQ(lhs, (0.5 / 0.5 + 0.5) * (1.0 / 0.5 + 1.0));
}

TEST(Design, PlantDimensionsChecked) {
  const auto cfg = encctl::testing::toy_config();
  auto plant = cfg.plant;
  plant.B = Mat::Ones(2, 1);
  EXPECT_THROW(validate(plant, cfg.controller), Error);
}
