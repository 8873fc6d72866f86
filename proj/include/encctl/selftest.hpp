#pragma once

// Golden vectors for packing over R_{4,17}.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "encctl/wide_int.hpp"

namespace encctl::selftest {

struct GoldenVectors {
  u128 N = 17;
  std::size_t p = 4;
  u128 root = 2;
  std::array<i128, 4> u{1, 3, 5, 7};
  std::array<i128, 4> v{2, -4, -6, 8};
  // Coefficients, constant term first.
  std::array<i128, 4> pack_u{4, -7, 4, -7};    // -7X^3 + 4X^2 - 7X + 4
  std::array<i128, 4> pack_v{0, 7, 8, 3};      //  3X^3 + 8X^2 + 7X
  std::array<i128, 4> sum_slots{3, -1, -1, -2};
  std::array<i128, 4> product{4, 4, 4, 1};     //  X^3 + 4X^2 + 4X + 4
  std::array<i128, 4> product_slots{2, 5, 4, 5};
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;
  bool pass() const;
};

Report run(const GoldenVectors& golden = {});

}  // namespace encctl::selftest
