#pragma once

// Real signals and gains to Z_N messages and back.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "encctl/wide_int.hpp"

namespace encctl::quant {

enum class RangeMode {
  kStrict,          // out-of-range values throw kRangeExceeded
  kWraparoundDemo,  // out-of-range values wrap mod N and are recorded
};

struct QuantParams {
  double L = 0;  // signal step
  double s = 0;  // gain step, 1/s >= 1
  u128 N = 0;
  RangeMode mode = RangeMode::kStrict;
};

/// Throws kInvalidArgument unless L > 0, 0 < s <= 1 and N >= 2.
void validate(const QuantParams& qp);

/// floor(x + 1/2). Throws kRangeExceeded for non-finite or |x| >= 2^100.
i128 round_half_up(double x);
std::vector<i128> round_half_up(const Eigen::VectorXd& x);
/// Row-major.
std::vector<i128> round_half_up(const Eigen::MatrixXd& x);

struct QuantizeResult {
  std::vector<i128> values;  // centered representatives in (-N/2, N/2]
  std::size_t wrapped = 0;   // entries that violated the range guard
};

/// round_half_up(x / scale) reduced to centered Z_N. Guard per entry:
/// |x / scale| + 1/2 < N/2.
QuantizeResult quantize(const Eigen::VectorXd& x, double scale, u128 N,
                        RangeMode mode = RangeMode::kStrict);

/// True iff |v| + 1/2 < N/2, i.e. v survives a centered reduction mod N.
bool in_range(double v, u128 N);

/// m * (L * s), entry-wise.
Eigen::VectorXd rescale(const std::vector<i128>& m, double L, double s);

}  // namespace encctl::quant
