#pragma once

// Exact arithmetic in Z_m and in R_{p,m} = Z_m[X]/(X^p + 1).
//
// Coefficients are kept in the centered set [-m/2, m/2). Multiplication picks
// one of four strategies with identical results:
//   * direct negacyclic NTT when m is an NTT-friendly prime below 2^62,
//   * residue-number-system NTT when m factors into distinct NTT-friendly
//     word primes (the usual shape of a BGV ciphertext modulus),
//   * exact integer convolution through a CRT basis of auxiliary NTT primes,
//     reduced mod m afterwards (any other m),
//   * schoolbook negacyclic convolution (reference path, selectable).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "encctl/wide_int.hpp"

namespace encctl::ring {

/// z mod m := z - floor((z + m/2) / m) * m, i.e. the representative in [-m/2, m/2).
i128 centered_mod(i128 z, u128 m) noexcept;

/// Smallest primitive 2p-th root of unity modulo the prime m.
/// Throws Error(kNoRoot) if m != 1 (mod 2p) or no root is found.
u128 find_primitive_root(u128 m, std::size_t p);

enum class MulStrategy { kAuto, kDirectNtt, kRnsNtt, kCrtNtt, kSchoolbook };

class NttTable;
class RingPoly;

/// Evaluation-domain image of a polynomial under a specific Modulus. Products
/// of spectra accumulate without intermediate inverse transforms, up to
/// `Modulus::accumulation_limit()` products per spectrum.
struct Spectrum {
  std::vector<std::uint64_t> words;
  int terms = 0;
};

class Modulus {
 public:
  /// Products one spectrum may accumulate under the auxiliary-CRT strategy.
  static constexpr int kCrtAccumulation = 64;

  /// m >= 2 with at most kMaxModulusBits bits; p a power of two.
  static std::shared_ptr<const Modulus> create(u128 m, std::size_t p,
                                               MulStrategy strategy = MulStrategy::kAuto);

  ~Modulus();
  Modulus(const Modulus&) = delete;
  Modulus& operator=(const Modulus&) = delete;

  u128 value() const noexcept { return m_; }
  std::size_t degree() const noexcept { return p_; }
  const std::optional<u128>& root() const noexcept { return root_; }
  MulStrategy strategy() const noexcept { return strategy_; }
  /// Word primes backing the NTT engine (0 for schoolbook).
  std::size_t prime_count() const noexcept;
  int accumulation_limit() const noexcept;

  bool same_ring(const Modulus& other) const noexcept {
    return m_ == other.m_ && p_ == other.p_;
  }

  Spectrum forward(const RingPoly& a) const;
  Spectrum zero_spectrum() const;
  Spectrum negate(const Spectrum& a) const;
  /// acc += a * b in the evaluation domain.
  void multiply_accumulate(Spectrum& acc, const Spectrum& a, const Spectrum& b) const;
  RingPoly backward(const Spectrum& s, const std::shared_ptr<const Modulus>& self) const;

  /// Evaluations a(zeta^(2i-1)), i = 1..p, in natural order. Requires a root.
  std::vector<i128> evaluate(std::span<const i128> coeffs) const;
  /// Inverse of evaluate: interpolates through the points zeta^(2i-1).
  std::vector<i128> interpolate(std::span<const i128> values) const;

 private:
  struct Engine;
  Modulus(u128 m, std::size_t p);

  u128 m_;
  std::size_t p_;
  std::optional<u128> root_;
  MulStrategy strategy_ = MulStrategy::kSchoolbook;
  std::unique_ptr<NttTable> eval_;
  std::unique_ptr<Engine> engine_;
};

using ModulusPtr = std::shared_ptr<const Modulus>;

/// Element of R_{p,m}. Always exactly p centered coefficients.
class RingPoly {
 public:
  explicit RingPoly(ModulusPtr modulus);

  /// Reduces every coefficient into [-m/2, m/2). Throws kLengthMismatch unless size == p.
  static RingPoly from_coeffs(ModulusPtr modulus, std::vector<i128> coeffs);
  static RingPoly constant(ModulusPtr modulus, i128 c);
  /// Caller guarantees coefficients are already centered.
  static RingPoly from_centered(ModulusPtr modulus, std::vector<i128> coeffs);

  const Modulus& modulus() const noexcept { return *modulus_; }
  const ModulusPtr& modulus_ptr() const noexcept { return modulus_; }
  std::size_t degree() const noexcept { return coeffs_.size(); }
  std::span<const i128> coeffs() const noexcept { return coeffs_; }
  i128 operator[](std::size_t i) const noexcept { return coeffs_[i]; }
  bool is_zero() const noexcept;

  friend bool operator==(const RingPoly& a, const RingPoly& b) noexcept {
    return a.modulus_->same_ring(*b.modulus_) && a.coeffs_ == b.coeffs_;
  }

 private:
  RingPoly(ModulusPtr modulus, std::vector<i128> coeffs)
      : modulus_(std::move(modulus)), coeffs_(std::move(coeffs)) {}

  ModulusPtr modulus_;
  std::vector<i128> coeffs_;
};

RingPoly poly_add(const RingPoly& a, const RingPoly& b);
RingPoly poly_sub(const RingPoly& a, const RingPoly& b);
RingPoly poly_neg(const RingPoly& a);
RingPoly poly_scale(i128 k, const RingPoly& a);
/// Negacyclic product through the modulus' multiplication strategy.
RingPoly poly_mul(const RingPoly& a, const RingPoly& b);
/// Reference O(p^2) negacyclic convolution.
RingPoly poly_mul_schoolbook(const RingPoly& a, const RingPoly& b);
/// Reinterprets coefficients under another modulus (centered re-reduction).
RingPoly change_modulus(const RingPoly& a, ModulusPtr target);

/// Natural-order evaluation at zeta_i = zeta^(2i-1). Throws kNoRoot without a root.
std::vector<i128> ntt_forward(const RingPoly& a);
RingPoly ntt_inverse(const ModulusPtr& modulus, std::span<const i128> values);

}  // namespace encctl::ring
