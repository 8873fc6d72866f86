#pragma once

// Secret-key BGV over R_{p,q} with plaintext space R_{p,N}.
//
//   Enc(m)      = [a*sk + N*e + m, -a]
//   Dec(c)      = <c, [1, sk, sk^2]> mod q, then centered mod N
//   c1 (+) c2   = c1 + c2
//   Mult(c1,c2) = [c11*c21, c11*c22 + c12*c21, c12*c22]
//
// No relinearization: a product stays a 3-polynomial ciphertext and is
// decrypted with the sk^2 term.

#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "encctl/ring.hpp"

namespace encctl::bgv {

using Prng = std::mt19937_64;

/// Derives an independent generator from a master seed and a stream label.
Prng make_stream(std::uint64_t master_seed, std::uint64_t stream);

struct BgvParams {
  u128 N = 0;
  u128 q = 0;
  std::size_t p = 0;
  double sigma = 3.2;
  std::size_t r_bar = 1;
};

/// Exponents of the quantization factors carried by an encrypted message:
/// the plaintext equals the real value times (1/L)^signal_exp (1/s)^gain_exp.
struct Scale {
  int signal_exp = 0;
  int gain_exp = 0;

  friend bool operator==(const Scale&, const Scale&) = default;
  friend Scale operator*(Scale a, Scale b) {
    return {a.signal_exp + b.signal_exp, a.gain_exp + b.gain_exp};
  }
};

inline constexpr Scale kSignalScale{1, 0};
inline constexpr Scale kGainScale{0, 1};

struct OpCounters {
  std::uint64_t enc = 0;
  std::uint64_t dec = 0;
  std::uint64_t add = 0;
  std::uint64_t mult = 0;
  std::uint64_t poly_mult = 0;

  friend bool operator==(const OpCounters&, const OpCounters&) = default;
  OpCounters& operator+=(const OpCounters& o);
  friend OpCounters operator-(OpCounters a, const OpCounters& b);
};

class Context {
 public:
  /// Throws kInvalidParams on gcd(N, q) != 1, q <= N, p not a power of two,
  /// sigma < 0, r_bar == 0 or an oversized modulus.
  static std::shared_ptr<const Context> create(const BgvParams& params);

  const BgvParams& params() const noexcept { return params_; }
  const ring::ModulusPtr& q_ring() const noexcept { return q_mod_; }
  const ring::ModulusPtr& plaintext_ring() const noexcept { return n_mod_; }

 private:
  explicit Context(const BgvParams& params);

  BgvParams params_;
  ring::ModulusPtr q_mod_;
  ring::ModulusPtr n_mod_;
};

using ContextPtr = std::shared_ptr<const Context>;

class SecretKey {
 public:
  const ContextPtr& context() const noexcept { return ctx_; }
  const ring::RingPoly& sk() const noexcept { return powers_[1]; }
  /// [1, sk, sk^2] over q.
  const std::vector<ring::RingPoly>& powers() const noexcept { return powers_; }
  const ring::Spectrum& sk_spectrum() const noexcept { return sk_spec_; }
  const ring::Spectrum& sk2_spectrum() const noexcept { return sk2_spec_; }

 private:
  friend SecretKey keygen(const ContextPtr& ctx, std::uint64_t seed);
  SecretKey(ContextPtr ctx, ring::RingPoly sk);

  ContextPtr ctx_;
  std::vector<ring::RingPoly> powers_;
  ring::Spectrum sk_spec_;
  ring::Spectrum sk2_spec_;
};

/// Deterministic in the seed. Coefficients ~ rounded N(0, sigma^2).
SecretKey keygen(const ContextPtr& ctx, std::uint64_t seed);

class Ciphertext {
 public:
  Ciphertext(ContextPtr ctx, std::vector<ring::RingPoly> polys, Scale scale, int mult_depth);

  const ContextPtr& context() const noexcept { return ctx_; }
  std::size_t size() const noexcept { return polys_.size(); }
  const ring::RingPoly& operator[](std::size_t i) const noexcept { return polys_[i]; }
  const std::vector<ring::RingPoly>& polys() const noexcept { return polys_; }
  Scale scale() const noexcept { return scale_; }
  /// Homomorphic multiplications behind this ciphertext (0 = fresh).
  int mult_depth() const noexcept { return mult_depth_; }
  /// Integers on the wire: p coefficients per polynomial.
  std::size_t integer_count() const noexcept { return size() * ctx_->params().p; }
  /// Forward transforms of the polynomials, computed once and shared by copies.
  const std::vector<ring::Spectrum>& spectra() const;

 private:
  struct SpectrumCache;

  ContextPtr ctx_;
  std::vector<ring::RingPoly> polys_;
  Scale scale_;
  int mult_depth_ = 0;
  std::shared_ptr<SpectrumCache> cache_;
};

/// Message polynomial must live in the plaintext ring (N, p).
Ciphertext encrypt(const SecretKey& key, const ring::RingPoly& message, Prng& rng,
                   Scale scale = {}, OpCounters* counters = nullptr);
/// Encrypts the constant polynomial c.
Ciphertext encrypt_scalar(const SecretKey& key, i128 c, Prng& rng, Scale scale = {},
                          OpCounters* counters = nullptr);
ring::RingPoly decrypt(const SecretKey& key, const Ciphertext& c, OpCounters* counters = nullptr);
/// <c, [1, sk, sk^2]> mod q before the reduction mod N.
ring::RingPoly decrypt_noise(const SecretKey& key, const Ciphertext& c);

Ciphertext hom_add(const Ciphertext& a, const Ciphertext& b, OpCounters* counters = nullptr);
Ciphertext hom_mul(const Ciphertext& a, const Ciphertext& b, OpCounters* counters = nullptr);
Ciphertext plain_scalar_mul(i128 k, const Ciphertext& c, Scale k_scale = {},
                            OpCounters* counters = nullptr);

/// sum_i Mult(a_i, m_i): r multiplications and r-1 additions, accumulated in
/// the evaluation domain. Throws kTooManyTerms if r > r_bar.
Ciphertext prod1(std::span<const Ciphertext> a, std::span<const Ciphertext> m,
                 OpCounters* counters = nullptr);
/// Same algebra on packed messages: decrypts to sum_i a_i o m_i slot-wise.
Ciphertext prod2(std::span<const Ciphertext> a, std::span<const Ciphertext> m,
                 OpCounters* counters = nullptr);

struct NoiseReport {
  bool pass = false;
  bool coprime = false;
  bool modulus_margin = false;     // q > N^2 p
  double log2_q = 0;
  double log2_half_q = 0;
  double log2_bound = 0;           // high-probability bound after one Mult and r_bar-1 adds
  double log2_worst_case = 0;      // deterministic bound with 6-sigma truncated errors
  std::size_t trials = 0;
  std::size_t failures = 0;
  double log2_max_observed = 0;
  std::string reason;
};

NoiseReport validate_params(const BgvParams& params, std::size_t trials = 1000,
                            std::uint64_t seed = 1);

// Wire format (little endian):
//   u32 magic 'ECTX' | u16 version | u8 poly_count | u8 coeff_width (16)
//   u32 p | i32 signal_exp | i32 gain_exp | u32 mult_depth | 16-byte q
//   then per polynomial: u32 length, length x 16-byte two's complement coefficients.
inline constexpr std::uint32_t kWireMagic = 0x58544345;  // "ECTX"
inline constexpr std::uint16_t kWireVersion = 1;

std::vector<std::uint8_t> serialize(const Ciphertext& c);
Ciphertext deserialize(const ContextPtr& ctx, std::span<const std::uint8_t> bytes);

}  // namespace encctl::bgv
