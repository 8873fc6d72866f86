#pragma once

// Packed encrypted controller. Hcal = [H_1 .. H_n | H_{n+1} .. H_{2n}] is split
// into 2n blocks, each block becomes one packed ciphertext, and every signal is
// duplicated h times so one slot-wise product computes all h rows at once.
//
// Slot layout (w = max(h, l)): partition r occupies slots [r w, r w + w).
//   gain block i: slot r w + j = round(H_i / s)[r, j]
//   signal x:     slot r w + j = round(x / L)[j]
// Unused slots are zero. Summing partition r of the product yields row r.

#include <cstddef>
#include <vector>

#include "encctl/bgv.hpp"
#include "encctl/control.hpp"
#include "encctl/enc_general.hpp"
#include "encctl/packing.hpp"
#include "encctl/quantization.hpp"

namespace encctl::packed {

using bgv::Ciphertext;
using control::Mat;

struct Layout {
  std::size_t n = 0, h = 0, l = 0, p = 0;

  std::size_t width() const noexcept { return h > l ? h : l; }
  std::size_t active_slots() const noexcept { return h * width(); }
};

/// Throws kDimMismatch if p < h max(h, l).
Layout make_layout(std::size_t n, std::size_t h, std::size_t l, std::size_t p);

/// First n blocks h x l, last n blocks h x h. Throws kDimMismatch.
std::vector<Mat> split_H(const Mat& Hcal, std::size_t n, std::size_t h, std::size_t l);

/// Row r of Hi into partition r, zero padded to p.
std::vector<i128> vectorize_pad(const std::vector<i128>& Hi_rowmajor, std::size_t rows, std::size_t cols,
                                const Layout& layout);
/// x copied into every partition, zero padded to p.
std::vector<i128> duplicate_pad(const std::vector<i128>& x, const Layout& layout);
/// Sum over each partition: h values.
std::vector<i128> partition_sum(const std::vector<i128>& slots, const Layout& layout);

/// Quantize at 1/L, duplicate h times, pack and encrypt. Throws kRangeExceeded.
Ciphertext duplicate_pack_encrypt(const Eigen::VectorXd& x, const quant::QuantParams& qp,
                                  const packing::PackingContext& pack, const Layout& layout,
                                  const bgv::SecretKey& key, bgv::Prng& rng,
                                  bgv::OpCounters* counters = nullptr);

struct ActuatorOutput {
  Eigen::VectorXd u;
  std::vector<i128> slots;      // Dec'(ubar), centered in Z_N
  std::vector<i128> u_int;      // partition sums
  std::vector<i128> u_requant;
  Ciphertext u_enc;
};

ActuatorOutput actuator_partition_sum(const Ciphertext& u_bar, const bgv::SecretKey& key,
                                      const quant::QuantParams& qp, const packing::PackingContext& pack,
                                      const Layout& layout, bgv::Prng& rng,
                                      bgv::OpCounters* counters = nullptr);

class PackedEncController {
 public:
  /// Encrypts the 2n gain blocks and the 2n chunks of z0. Throws kTooManyTerms
  /// if 2n > r_bar, kRangeExceeded for out-of-range gains or z0.
  static PackedEncController setup(const bgv::SecretKey& key, const control::TransformedController& t,
                                   const quant::QuantParams& qp, const packing::PackingContext& pack,
                                   bgv::Prng& rng);

  /// ubar(k) = Prod2({H_i}, {z_i(k)}).
  Ciphertext output(bgv::OpCounters* counters = nullptr) const;
  /// z_1 <- y(k), z_{n+1} <- u(k), older entries shift by one.
  void update(Ciphertext y_enc, Ciphertext u_enc);

  const Layout& layout() const noexcept { return layout_; }
  std::size_t step() const noexcept { return step_; }
  const std::vector<Ciphertext>& gains() const noexcept { return H_; }
  const std::vector<Ciphertext>& state() const noexcept { return z_; }
  general::StorageCounts storage() const;

 private:
  PackedEncController(Layout layout) : layout_(layout) {}

  Layout layout_;
  std::vector<Ciphertext> H_;  // 2n
  std::vector<Ciphertext> z_;  // 2n
  std::size_t step_ = 0;
};

}  // namespace encctl::packed
