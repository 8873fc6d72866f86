#include "encctl/quantization.hpp"

#include <cmath>

#include "encctl/error.hpp"
#include "encctl/ring.hpp"

namespace encctl::quant {

void validate(const QuantParams& qp) {
  require(std::isfinite(qp.L) && qp.L > 0, ErrorCode::kInvalidArgument, "L must be positive");
  require(std::isfinite(qp.s) && qp.s > 0 && qp.s <= 1, ErrorCode::kInvalidArgument,
          "s must satisfy 0 < s <= 1");
  require(qp.N >= 2, ErrorCode::kInvalidArgument, "N must be at least 2");
}

i128 round_half_up(double x) {
  const double r = std::floor(x + 0.5);
  require(std::isfinite(r) && std::fabs(r) < 0x1p100, ErrorCode::kRangeExceeded,
          "value too large to round into an integer");
  if (std::fabs(r) < 0x1p63) return static_cast<std::int64_t>(r);
  // |r| >= 2^63 has at most 53 significant bits, so both parts are exact.
  const double mag = std::fabs(r);
  const double hi = std::floor(mag / 0x1p64);
  const double lo = mag - hi * 0x1p64;
  const i128 v = static_cast<i128>(static_cast<std::uint64_t>(hi)) * (static_cast<i128>(1) << 64) +
                 static_cast<i128>(static_cast<std::uint64_t>(lo));
  return r < 0 ? -v : v;
}

std::vector<i128> round_half_up(const Eigen::VectorXd& x) {
  std::vector<i128> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = round_half_up(x(i));
  return out;
}

std::vector<i128> round_half_up(const Eigen::MatrixXd& x) {
  std::vector<i128> out;
  out.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.push_back(round_half_up(x(i, j)));
  return out;
}

bool in_range(double v, u128 N) {
  return std::fabs(v) + 0.5 < static_cast<double>(N) / 2.0;
}

QuantizeResult quantize(const Eigen::VectorXd& x, double scale, u128 N, RangeMode mode) {
  require(std::isfinite(scale) && scale > 0, ErrorCode::kInvalidArgument, "scale must be positive");
  require(N >= 2, ErrorCode::kInvalidArgument, "N must be at least 2");
  QuantizeResult res;
  res.values.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i) / scale;
    if (!in_range(v, N)) {
      if (mode == RangeMode::kStrict) {
        fail(ErrorCode::kRangeExceeded, "quantized value " + std::to_string(v) + " at index " +
                                            std::to_string(i) + " leaves Z_N");
      }
      ++res.wrapped;
    }
    res.values.push_back(ring::centered_mod(round_half_up(v), N));
  }
  return res;
}

Eigen::VectorXd rescale(const std::vector<i128>& m, double L, double s) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(m.size()));
  const double f = L * s;
  for (std::size_t i = 0; i < m.size(); ++i) out(static_cast<Eigen::Index>(i)) = static_cast<double>(m[i]) * f;
  return out;
}

}  // namespace encctl::quant
