#pragma once

// 128-bit integer helpers. Ring coefficients are stored as signed 128-bit
// values so that a ~2^74 ciphertext modulus fits without RNS decomposition.

#include <cstdint>
#include <string>
#include <string_view>

namespace encctl {

using i128 = __int128;
using u128 = unsigned __int128;

/// Largest supported modulus bit length. Keeps the CRT reconstruction
/// arithmetic inside 128 bits.
inline constexpr int kMaxModulusBits = 100;

int bit_length(u128 x) noexcept;

/// a * b mod m for a, b < m and m < 2^127.
u128 mul_mod(u128 a, u128 b, u128 m) noexcept;
u128 pow_mod(u128 base, u128 exp, u128 m) noexcept;

/// Modular inverse via extended Euclid; returns 0 when gcd(a, m) != 1.
u128 inv_mod(u128 a, u128 m) noexcept;
u128 gcd(u128 a, u128 b) noexcept;

/// Miller-Rabin with the first 13 prime bases: deterministic below 3.3e24,
/// probabilistic above.
bool is_probable_prime(u128 n) noexcept;

std::string to_string(i128 v);
std::string to_string(u128 v);

/// Parses a non-negative decimal string. Throws Error(kInvalidArgument).
u128 parse_u128(std::string_view text);

}  // namespace encctl
