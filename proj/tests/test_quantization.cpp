#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "encctl/error.hpp"
#include "encctl/quantization.hpp"

using namespace encctl;
using namespace encctl::quant;

TEST(RoundHalfUp, TiesGoUp) {
  EXPECT_EQ(round_half_up(2.5), i128(3));
  EXPECT_EQ(round_half_up(-2.5), i128(-2));
  EXPECT_EQ(round_half_up(-0.5), i128(0));
  EXPECT_EQ(round_half_up(-0.51), i128(-1));
  EXPECT_EQ(round_half_up(0.49), i128(0));
  EXPECT_EQ(round_half_up(-7.0), i128(-7));
}

TEST(RoundHalfUp, BeyondSixtyFourBits) {
  EXPECT_EQ(round_half_up(std::ldexp(1.0, 80)), i128(1) << 80);
  EXPECT_EQ(round_half_up(-std::ldexp(1.0, 80)), -(i128(1) << 80));
  EXPECT_EQ(round_half_up(-std::ldexp(3.0, 70)), -(i128(3) << 70));
}

TEST(RoundHalfUp, RejectsNonFiniteAndHuge) {
  for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                     std::ldexp(1.0, 100)}) {
    try {
      round_half_up(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kRangeExceeded);
    }
  }
}

TEST(Quantize, CentersAndGuards) {
  Eigen::VectorXd x(3);
  x << 0.0123, -0.0049, 0.0;
  const auto r = quantize(x, 0.001, 101);
  EXPECT_EQ(r.values, (std::vector<i128>{12, -5, 0}));
  EXPECT_EQ(r.wrapped, 0u);
}

TEST(Quantize, StrictThrowsWraparoundWraps) {
  Eigen::VectorXd x(2);
  x << 0.060, 0.010;  // 60 does not fit in Z_101 centered
  try {
    quantize(x, 0.001, 101);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRangeExceeded);
  }
  const auto r = quantize(x, 0.001, 101, RangeMode::kWraparoundDemo);
  EXPECT_EQ(r.values, (std::vector<i128>{-41, 10}));
  EXPECT_EQ(r.wrapped, 1u);
}

TEST(Quantize, InRangeBoundary) {
  EXPECT_TRUE(in_range(49.0, 101));
  EXPECT_TRUE(in_range(-49.9, 101));
  EXPECT_FALSE(in_range(50.0, 101));
  EXPECT_FALSE(in_range(-50.0, 101));
}

TEST(Quantize, RescaleAndValidate) {
  const auto u = rescale({100, -3}, 0.5, 0.01);
  EXPECT_DOUBLE_EQ(u(0), 0.5);
  EXPECT_DOUBLE_EQ(u(1), -0.015);
  EXPECT_THROW(validate({0.0, 0.1, 17}), Error);
  EXPECT_THROW(validate({0.1, 1.5, 17}), Error);
  EXPECT_THROW(validate({0.1, 0.1, 1}), Error);
  EXPECT_NO_THROW(validate({0.1, 1.0, 17}));
}

TEST(Quantize, MatrixIsRowMajor) {
  Eigen::MatrixXd m(2, 2);
  m << 1.4, 2.6, -3.5, 4.5;
  EXPECT_EQ(round_half_up(m), (std::vector<i128>{1, 3, -3, 5}));
}
