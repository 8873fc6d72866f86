#include <gtest/gtest.h>

#include <limits>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "encctl/control.hpp"
#include "encctl/error.hpp"
#include "test_support.hpp"

using namespace encctl;
using namespace encctl::control;

namespace {
constexpr double kRefTol = 1e-9;
}

TEST(ControlF16, MatchesFloatingReference) {
  const auto cfg = encctl::testing::f16_config();
  const auto& ref = encctl::testing::f16_reference();
  const auto t = transform(cfg.controller);
  EXPECT_EQ(t.n, 5u);
  EXPECT_EQ(t.h, 2u);
  EXPECT_EQ(t.l, 5u);
  EXPECT_EQ(t.n_bar, 35u);
  EXPECT_NEAR(inf_norm(t.M), ref["M_inf"].get<double>(), kRefTol);
  EXPECT_NEAR(inf_norm(t.z0), ref["z0_inf"].get<double>(), kRefTol);
  EXPECT_NEAR(inf_norm(t.Hcal), ref["Hcal_inf"].get<double>(), kRefTol);
  EXPECT_LT(inf_norm(Vec(t.M * t.z0 - cfg.controller.x0)), 1e-12);
  EXPECT_LT(t.nilpotency_residual, 1e-12);
}

TEST(ControlF16, RealizationsAgree) {
  const auto cfg = encctl::testing::f16_config();
  const auto t = transform(cfg.controller);
  std::mt19937_64 rng(1);
  const auto cmp = encctl::testing::compare_realizations(cfg.controller, t, rng, 50);
  EXPECT_LT(cmp.max_rel_err, 1e-9);
  EXPECT_LT(cmp.state_match, 1e-12);
}

TEST(Control, RandomControllersAgree) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 5, h = 1 + trial % 3, l = 1 + (trial / 3) % 3;
    const auto c = encctl::testing::random_controller(rng, n, h, l);
    const auto t = transform(c);
    const auto cmp = encctl::testing::compare_realizations(c, t, rng, 50);
    EXPECT_LT(cmp.max_rel_err, 1e-6) << "trial " << trial;
    EXPECT_LT(cmp.state_match, 1e-8) << "trial " << trial;
  }
}

TEST(Control, DeadbeatGainIsNilpotent) {
  Mat F(2, 2), H(1, 2);
  F << 1, 1, 0, 1;
  H << 1, 0;
  const Mat R = deadbeat_gain(F, H);
  const Mat Fb = F - R * H;
  EXPECT_LT((Fb * Fb).cwiseAbs().maxCoeff(), 1e-12);
  // For this pair the gain is unique: R = [2; 1].
  EXPECT_NEAR(R(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(R(1, 0), 1.0, 1e-12);
}

TEST(Control, UnobservableRejected) {
  ControllerRealization c;
  c.F = Mat::Identity(2, 2) * 0.5;
  c.G = Mat::Ones(2, 1);
  c.H = Mat(1, 2);
  c.H << 1, 0;
  c.x0 = Vec::Zero(2);
  try {
    transform(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotObservable);
  }
}

TEST(Control, UncontrollableRejected) {
  ControllerRealization c;
  c.F = Mat(2, 2);
  c.F << 0.5, 0, 0, 0.3;
  c.G = Mat(2, 1);
  c.G << 1, 0;
  c.H = Mat(1, 2);
  c.H << 1, 1;
  c.x0 = Vec::Ones(2);
  try {
    transform(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotControllable);
  }
}

TEST(Control, DimensionMismatch) {
  ControllerRealization c;
  c.F = Mat::Identity(2, 2) * 0.5;
  c.G = Mat::Ones(3, 1);
  c.H = Mat::Ones(1, 2);
  c.x0 = Vec::Zero(2);
  try {
    transform(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

TEST(Control, StructuralMatricesShiftTheContainer) {
  const auto s = build_structural(2, 1, 2);
  // z = [y(k-1); y(k-2); u(k-1); u(k-2)] with l = 2, h = 1.
  Vec z(6), y(2), u(1);
  z << 1, 2, 3, 4, 5, 6;
  y << 7, 8;
  u << 9;
  Vec expect(6);
  expect << 7, 8, 1, 2, 9, 5;
  EXPECT_EQ(structural_update(s, z, y, u), expect);
  EXPECT_EQ(s.Fcal.rows(), 6);
  EXPECT_EQ(s.Gcal.cols(), 2);
  EXPECT_EQ(s.Rcal.cols(), 1);
}

TEST(Control, NormsAndRank) {
  Mat A(2, 2);
  A << 1, -2, 3, 4;
  EXPECT_DOUBLE_EQ(inf_norm(A), 7.0);
  Vec v(3);
  v << 1, -5, 2;
  EXPECT_DOUBLE_EQ(inf_norm(v), 5.0);
  Mat B(2, 2);
  B << 1, 2, 2, 4;
  EXPECT_EQ(numerical_rank(B), 1u);
  EXPECT_NEAR(spectral_radius(A), std::sqrt(10.0), 1e-12);  // complex pair, |lambda|^2 = det = 10
}

TEST(Control, GainSelectionMinimizesOutputSensitivity) {
  std::mt19937_64 rng(9);
  const auto c = encctl::testing::random_controller(rng, 4, 3, 2);
  const auto cands = deadbeat_gains(c.F, c.H);
  EXPECT_EQ(cands.size(), 6u);  // 3! orderings
  double best = std::numeric_limits<double>::infinity();
  for (const auto& R : cands) {
    const Mat Fb = c.F - R * c.H;
    EXPECT_LT(Fb.pow(4).cwiseAbs().maxCoeff(), 1e-8);
    best = std::min(best, inf_norm(Mat(c.H * build_M(c.F, c.G, c.H, R))));
  }
  EXPECT_DOUBLE_EQ(inf_norm(transform(c).Hcal), best);
}
