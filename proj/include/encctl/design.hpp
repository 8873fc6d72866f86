#pragma once

// Closed-loop error budget and plaintext-modulus sizing.
//
// All norms are infinity norms.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "encctl/control.hpp"
#include "encctl/wide_int.hpp"

namespace encctl::design {

using control::Mat;
using control::Vec;

struct PlantModel {
  Mat A;  // n_p x n_p
  Mat B;  // n_p x h
  Mat C;  // l x n_p
  Vec xp0;

  std::size_t n_p() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t h() const { return static_cast<std::size_t>(B.cols()); }
  std::size_t l() const { return static_cast<std::size_t>(C.rows()); }
};

/// Throws kDimMismatch.
void validate(const PlantModel& plant, const control::ControllerRealization& ctrl);

/// State [x_p; x], disturbance e = [e_u; e_x], output [y; u].
struct ClosedLoopModel {
  Mat A;  // [[A, B H], [G C, F]]
  Mat B;  // [[B, 0], [0, I_n]]
  Mat C;  // [[C, 0], [0, H]]
  Mat D;  // [[0, 0], [I_h, 0]]
  Vec x0;
};

ClosedLoopModel closed_loop(const PlantModel& plant, const control::ControllerRealization& ctrl);

struct DecayCertificate {
  double alpha = 0;
  double gamma = 0;
  double rho = 0;
  std::size_t K = 0;         // first k >= 1 with ||A^k|| <= gamma^k
  std::size_t verified = 0;  // certificate checked for k <= verified
};

/// gamma = (rho + 1) / 2, alpha = max_{k <= K} ||A^k|| / gamma^k.
/// Throws kUnstable if rho >= 1.
DecayCertificate decay_certificate(const Mat& A_cl);

using EpsilonVector = std::array<double, 4>;

double beta_of(const ClosedLoopModel& model, const DecayCertificate& cert);
EpsilonVector epsilon_vector(const ClosedLoopModel& model, const DecayCertificate& cert, const Mat& M,
                             std::size_t n_bar, const Vec& z0);
/// (e1 L + e2 L s + e3 s) / (1 - e0 s). Throws kSInvalid if 1 - e0 s <= 0.
double epsilon_of(double L, double s, const EpsilonVector& eps);
/// alpha ||C_cl|| ||x_cl(0)||.
double bound_S(const ClosedLoopModel& model, const DecayCertificate& cert);

/// Left-hand sides of the two modulus conditions; the condition is lhs < N/2.
double general_modulus_lhs(double L, double s, const EpsilonVector& eps, double S, const Vec& z0);
double packed_modulus_lhs(double L, double s, const EpsilonVector& eps, double S, const Vec& z0,
                          const std::vector<Mat>& H_blocks, std::size_t n);

/// Smallest prime N = 1 mod 2p with lhs < N/2. Throws kSInvalid.
u128 min_modulus_general(double L, double s, const EpsilonVector& eps, double S, const Vec& z0,
                         std::size_t p);
u128 min_modulus_packed(double L, double s, const EpsilonVector& eps, double S, const Vec& z0,
                        const std::vector<Mat>& H_blocks, std::size_t n, std::size_t p);
/// Smallest prime N = 1 mod 2p with N > bound.
u128 next_ntt_prime(double bound, std::size_t p);

struct Envelopes {
  double Delta = 0;
  double delta = 0;
  double U = 0;      // bound on ||[u; y]|| of the perturbed loop
  double U_hat = 0;  // bound on the deviation from the nominal loop
  bool valid = false;
};

Envelopes envelopes(double L, double s, const ClosedLoopModel& model, const DecayCertificate& cert,
                    double beta, const Mat& M, std::size_t n_bar, const Vec& z0);

struct DesignReport {
  DecayCertificate cert;
  double beta = 0;
  EpsilonVector eps{};
  double S = 0;
  double L = 0, s = 0;
  std::optional<double> eps_Ls;
  std::optional<u128> N_general;
  std::optional<u128> N_packed;
  Envelopes env;
  /// Margins of the configured N against both conditions, when one is given.
  std::optional<bool> configured_N_general_ok;
  std::optional<bool> configured_N_packed_ok;
  bool feasible = false;
  std::string reason;
};

DesignReport design(const PlantModel& plant, const control::ControllerRealization& ctrl, double L,
                    double s, std::size_t p, std::optional<u128> configured_N = std::nullopt);

}  // namespace encctl::design
