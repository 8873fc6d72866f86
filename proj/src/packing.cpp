#include "encctl/packing.hpp"

#include "encctl/error.hpp"

namespace encctl::packing {

PackingContext::PackingContext(u128 N, std::size_t p) : PackingContext(ring::Modulus::create(N, p)) {}

PackingContext::PackingContext(ring::ModulusPtr plaintext_modulus) : mod_(std::move(plaintext_modulus)) {
  require(mod_ != nullptr, ErrorCode::kInvalidArgument, "null plaintext modulus");
  const u128 N = mod_->value();
  require(is_probable_prime(N), ErrorCode::kInvalidParams,
          "packing needs a prime plaintext modulus, got " + to_string(N));
  require(mod_->root().has_value(), ErrorCode::kNoRoot,
          "plaintext modulus " + to_string(N) + " has no primitive 2p-th root");
  const std::size_t p = mod_->degree();
  const u128 z = *mod_->root();
  const u128 z2 = mul_mod(z, z, N);
  zetas_.resize(p);
  u128 cur = z;
  for (std::size_t i = 0; i < p; ++i) {
    zetas_[i] = cur;
    cur = mul_mod(cur, z2, N);
  }
  inv_p_ = inv_mod(p % N, N);
}

ring::RingPoly PackingContext::pack(std::span<const i128> v) const {
  require(v.size() == slots(), ErrorCode::kLengthMismatch,
          "pack expects " + std::to_string(slots()) + " slots, got " + std::to_string(v.size()));
  return ring::ntt_inverse(mod_, v);
}

std::vector<i128> PackingContext::unpack(const ring::RingPoly& f) const {
  require(f.modulus().same_ring(*mod_), ErrorCode::kModulusMismatch, "unpack of a foreign polynomial");
  return ring::ntt_forward(f);
}

}  // namespace encctl::packing
