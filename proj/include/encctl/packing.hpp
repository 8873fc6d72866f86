#pragma once

// Slot packing: integer vectors in Z_N^p <-> plaintext polynomials in R_{p,N}.
// Slot i carries the evaluation at zeta_i = zeta^(2i-1), so ring addition and
// multiplication act slot-wise.

#include <span>
#include <vector>

#include "encctl/ring.hpp"

namespace encctl::packing {

class PackingContext {
 public:
  /// N must be prime with N = 1 (mod 2p). Throws kNoRoot / kInvalidParams otherwise.
  PackingContext(u128 N, std::size_t p);
  explicit PackingContext(ring::ModulusPtr plaintext_modulus);

  const ring::ModulusPtr& modulus() const noexcept { return mod_; }
  std::size_t slots() const noexcept { return mod_->degree(); }
  u128 plaintext_modulus() const noexcept { return mod_->value(); }
  u128 zeta() const noexcept { return *mod_->root(); }
  /// zeta_i for i = 1..p, stored at index i-1.
  const std::vector<u128>& zetas() const noexcept { return zetas_; }
  u128 inv_p() const noexcept { return inv_p_; }

  /// Throws kLengthMismatch unless v.size() == p.
  ring::RingPoly pack(std::span<const i128> v) const;
  std::vector<i128> unpack(const ring::RingPoly& f) const;

 private:
  ring::ModulusPtr mod_;
  std::vector<u128> zetas_;
  u128 inv_p_ = 0;
};

}  // namespace encctl::packing
