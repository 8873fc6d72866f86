#pragma once

// Element-wise encrypted controller. Every scalar rides in the constant
// coefficient of its own ciphertext.
//
//   ubar(k)  = Hbar * z(k)                       (h inner products, prod1)
//   z(k+1)   = Fcal z(k) + Gcal y(k) + Rcal u(k)  (container shift)

#include <cstddef>
#include <vector>

#include "encctl/bgv.hpp"
#include "encctl/control.hpp"
#include "encctl/quantization.hpp"

namespace encctl::general {

using bgv::Ciphertext;

/// Polynomials held by each encrypted quantity. The controller fills z and H;
/// the loop fills the transmitted signals.
struct StorageCounts {
  std::size_t u = 0, u_bar = 0, y = 0, z = 0, H = 0;
};

/// Quantize at 1/L and encrypt each component. Throws kRangeExceeded.
std::vector<Ciphertext> sensor_encrypt(const Eigen::VectorXd& y, const quant::QuantParams& qp,
                                       const bgv::SecretKey& key, bgv::Prng& rng,
                                       bgv::OpCounters* counters = nullptr);

struct ActuatorOutput {
  Eigen::VectorXd u;               // Dec(ubar) * L s
  std::vector<i128> u_int;         // Dec(ubar), centered in Z_N
  std::vector<i128> u_requant;     // round(u / L) fed back
  std::vector<Ciphertext> u_enc;   // fresh encryptions of u_requant
};

ActuatorOutput actuator_step(const std::vector<Ciphertext>& u_bar, const bgv::SecretKey& key,
                             const quant::QuantParams& qp, bgv::Prng& rng,
                             bgv::OpCounters* counters = nullptr);

class GeneralEncController {
 public:
  /// Encrypts round(Hcal / s) and round(z0 / L). Throws kRangeExceeded if a
  /// quantized gain or initial entry leaves Z_N, kTooManyTerms if n_bar > r_bar.
  static GeneralEncController setup(const bgv::SecretKey& key, const control::TransformedController& t,
                                    const quant::QuantParams& qp, bgv::Prng& rng);

  /// ubar(k) = Hbar * z(k). One length-3 ciphertext per input channel.
  std::vector<Ciphertext> output(bgv::OpCounters* counters = nullptr) const;
  /// Shifts y(k), u(k) into the container. Inputs must be fresh at scale 1/L.
  void update(std::vector<Ciphertext> y_enc, std::vector<Ciphertext> u_enc);
  /// Same update via the literal 0/1 matrices (integer linear combinations
  /// of ciphertexts). Used to cross-check the rotation.
  void update_structural(const std::vector<Ciphertext>& y_enc, const std::vector<Ciphertext>& u_enc);

  std::size_t n() const noexcept { return n_; }
  std::size_t h() const noexcept { return h_; }
  std::size_t l() const noexcept { return l_; }
  std::size_t n_bar() const noexcept { return n_ * (h_ + l_); }
  std::size_t step() const noexcept { return step_; }
  const std::vector<std::vector<Ciphertext>>& gains() const noexcept { return H_; }
  const std::vector<Ciphertext>& state() const noexcept { return z_; }
  StorageCounts storage() const;

 private:
  GeneralEncController() = default;

  std::size_t n_ = 0, h_ = 0, l_ = 0;
  control::Structural structural_;
  std::vector<std::vector<Ciphertext>> H_;  // h rows of n_bar
  std::vector<Ciphertext> z_;               // y(k-1..k-n), u(k-1..k-n)
  std::size_t step_ = 0;
};

}  // namespace encctl::general
