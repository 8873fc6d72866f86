#include "encctl/wide_int.hpp"

#include <algorithm>
#include <array>

#include "encctl/error.hpp"

namespace encctl {

int bit_length(u128 x) noexcept {
  const auto hi = static_cast<std::uint64_t>(x >> 64);
  if (hi != 0) return 128 - __builtin_clzll(hi);
  const auto lo = static_cast<std::uint64_t>(x);
  return lo == 0 ? 0 : 64 - __builtin_clzll(lo);
}

u128 mul_mod(u128 a, u128 b, u128 m) noexcept {
  const int mbits = bit_length(m);
  if (mbits <= 64) return (a * b) % m;
  // Horner over chunks of b so that every intermediate stays below 2^128.
  const int chunk = 127 - mbits;
  const u128 mask = (u128{1} << chunk) - 1;
  const int bbits = bit_length(b);
  int shift = ((bbits + chunk - 1) / chunk) * chunk;
  u128 r = 0;
  while (shift > 0) {
    shift -= chunk;
    r = (r << chunk) % m;
    r = (r + a * ((b >> shift) & mask)) % m;
  }
  return r;
}

u128 pow_mod(u128 base, u128 exp, u128 m) noexcept {
  if (m == 1) return 0;
  u128 result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

u128 gcd(u128 a, u128 b) noexcept {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

u128 inv_mod(u128 a, u128 m) noexcept {
  // Extended Euclid on signed values; |coefficients| stay below m < 2^127.
  i128 old_r = static_cast<i128>(a % m), r = static_cast<i128>(m);
  i128 old_s = 1, s = 0;
  while (r != 0) {
    const i128 q = old_r / r;
    i128 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) return 0;
  if (old_s < 0) old_s += static_cast<i128>(m);
  return static_cast<u128>(old_s);
}

bool is_probable_prime(u128 n) noexcept {
  constexpr std::array<unsigned, 13> kBases = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
  if (n < 2) return false;
  for (unsigned b : kBases) {
    if (n == b) return true;
    if (n % b == 0) return false;
  }
  u128 d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (unsigned b : kBases) {
    u128 x = pow_mod(b, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_string(i128 v) {
  if (v < 0) return "-" + to_string(static_cast<u128>(-(v + 1)) + 1);
  return to_string(static_cast<u128>(v));
}

u128 parse_u128(std::string_view text) {
  require(!text.empty(), ErrorCode::kInvalidArgument, "empty integer literal");
  u128 v = 0;
  for (char c : text) {
    require(c >= '0' && c <= '9', ErrorCode::kInvalidArgument,
            "bad digit in integer literal '" + std::string(text) + "'");
    const u128 next = v * 10 + static_cast<unsigned>(c - '0');
    require(next / 10 == v, ErrorCode::kInvalidArgument, "integer literal overflows 128 bits");
    v = next;
  }
  return v;
}

}  // namespace encctl
