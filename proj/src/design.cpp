#include "encctl/design.hpp"

#include <cmath>
#include <limits>

#include "encctl/enc_packed.hpp"
#include "encctl/error.hpp"

namespace encctl::design {

using control::inf_norm;

void validate(const PlantModel& plant, const control::ControllerRealization& ctrl) {
  const auto np = plant.A.rows();
  require(np >= 1 && plant.A.cols() == np, ErrorCode::kDimMismatch, "plant A must be square");
  require(plant.B.rows() == np && plant.B.cols() >= 1, ErrorCode::kDimMismatch, "plant B must have n_p rows");
  require(plant.C.cols() == np && plant.C.rows() >= 1, ErrorCode::kDimMismatch, "plant C must have n_p columns");
  require(plant.xp0.size() == np, ErrorCode::kDimMismatch, "xp0 must have length n_p");
  const auto n = ctrl.F.rows();
  require(n >= 1 && ctrl.F.cols() == n, ErrorCode::kDimMismatch, "controller F must be square");
  require(ctrl.G.rows() == n && ctrl.G.cols() == plant.C.rows(), ErrorCode::kDimMismatch,
          "controller G must be n x l");
  require(ctrl.H.cols() == n && ctrl.H.rows() == plant.B.cols(), ErrorCode::kDimMismatch,
          "controller H must be h x n");
  require(ctrl.x0.size() == n, ErrorCode::kDimMismatch, "controller x0 must have length n");
}

ClosedLoopModel closed_loop(const PlantModel& plant, const control::ControllerRealization& ctrl) {
  validate(plant, ctrl);
  const auto np = plant.A.rows(), n = ctrl.F.rows(), h = plant.B.cols(), l = plant.C.rows();
  ClosedLoopModel m;
  m.A.resize(np + n, np + n);
  m.A << plant.A, plant.B * ctrl.H, ctrl.G * plant.C, ctrl.F;
  m.B = Mat::Zero(np + n, h + n);
  m.B.topLeftCorner(np, h) = plant.B;
  m.B.bottomRightCorner(n, n).setIdentity();
  m.C = Mat::Zero(l + h, np + n);
  m.C.topLeftCorner(l, np) = plant.C;
  m.C.bottomRightCorner(h, n) = ctrl.H;
  m.D = Mat::Zero(l + h, h + n);
  m.D.block(l, 0, h, h).setIdentity();
  m.x0.resize(np + n);
  m.x0 << plant.xp0, ctrl.x0;
  return m;
}

DecayCertificate decay_certificate(const Mat& A_cl) {
  DecayCertificate c;
  c.rho = control::spectral_radius(A_cl);
  require(c.rho < 1.0, ErrorCode::kUnstable, "closed loop is not Schur stable (rho = " + std::to_string(c.rho) + ")");
  c.gamma = (c.rho + 1.0) / 2.0;
  c.alpha = 1.0;  // k = 0
  const auto dim = A_cl.rows();
  Mat P = Mat::Identity(dim, dim);
  double gk = 1.0;
  constexpr std::size_t kSearchLimit = 1000000;
  for (std::size_t k = 1; k <= kSearchLimit; ++k) {
    P = P * A_cl;
    gk *= c.gamma;
    const double ratio = inf_norm(P) / gk;
    if (ratio > c.alpha) c.alpha = ratio;
    if (ratio <= 1.0) {
      c.K = k;
      break;
    }
  }
  require(c.K > 0, ErrorCode::kInternal, "decay certificate search did not terminate");
  // Post-hoc check up to 10 K, renormalizing to avoid underflow of gamma^k.
  P = Mat::Identity(dim, dim);
  for (std::size_t k = 1; k <= 10 * c.K; ++k) {
    P = (P * A_cl) / c.gamma;
    const double ratio = inf_norm(P);
    require(ratio <= c.alpha * (1.0 + 1e-12), ErrorCode::kInternal,
            "decay certificate violated at k = " + std::to_string(k));
  }
  c.verified = 10 * c.K;
  return c;
}

double beta_of(const ClosedLoopModel& model, const DecayCertificate& cert) {
  return 1.0 + cert.alpha * inf_norm(model.C) * inf_norm(model.B) / (1.0 - cert.gamma);
}

EpsilonVector epsilon_vector(const ClosedLoopModel& model, const DecayCertificate& cert, const Mat& M,
                             std::size_t n_bar, const Vec& z0) {
  const double beta = beta_of(model, cert);
  const double nb = static_cast<double>(n_bar);
  const double aC = cert.alpha * inf_norm(model.C);
  return {0.5 * nb * beta, 0.5 * inf_norm(M) * (aC + beta), 0.5 * nb * beta / 2.0,
          0.5 * nb * beta * (aC * inf_norm(model.x0) + inf_norm(z0))};
}

double epsilon_of(double L, double s, const EpsilonVector& eps) {
  const double den = 1.0 - eps[0] * s;
  if (!(den > 0)) {
    fail(ErrorCode::kSInvalid, "1/s = " + std::to_string(1.0 / s) + " does not exceed eps0 = " +
                                   std::to_string(eps[0]));
  }
  return (eps[1] * L + eps[2] * L * s + eps[3] * s) / den;
}

double bound_S(const ClosedLoopModel& model, const DecayCertificate& cert) {
  return cert.alpha * inf_norm(model.C) * inf_norm(model.x0);
}

double general_modulus_lhs(double L, double s, const EpsilonVector& eps, double S, const Vec& z0) {
  const double e = epsilon_of(L, s, eps);
  return std::max((e + S) / s, inf_norm(z0)) / L + 0.5;
}

double packed_modulus_lhs(double L, double s, const EpsilonVector& eps, double S, const Vec& z0,
                          const std::vector<Mat>& H_blocks, std::size_t n) {
  const double e = epsilon_of(L, s, eps);
  require(!H_blocks.empty(), ErrorCode::kDimMismatch, "no gain blocks");
  Eigen::Index w = 0;
  const Eigen::Index h = H_blocks.front().rows();
  for (const auto& b : H_blocks) w = std::max(w, b.cols());
  Mat sum = Mat::Zero(w, h);
  for (const auto& b : H_blocks) sum.topRows(b.cols()) += b.transpose();
  const double gain = sum.cwiseAbs().maxCoeff() / s + static_cast<double>(n);
  return (std::max(e + S, inf_norm(z0)) / L + 0.5) * gain;
}

u128 next_ntt_prime(double bound, std::size_t p) {
  require(std::isfinite(bound) && bound < 0x1p99, ErrorCode::kSInvalid, "modulus bound is not finite");
  const u128 step = 2 * static_cast<u128>(p);
  u128 lo = bound < 0 ? 0 : static_cast<u128>(std::floor(bound));  // N must exceed this
  u128 cand = (lo / step) * step + 1;
  while (cand <= lo || static_cast<double>(cand) <= bound) cand += step;
  while (!is_probable_prime(cand)) cand += step;
  return cand;
}

u128 min_modulus_general(double L, double s, const EpsilonVector& eps, double S, const Vec& z0,
                         std::size_t p) {
  return next_ntt_prime(2.0 * general_modulus_lhs(L, s, eps, S, z0), p);
}

u128 min_modulus_packed(double L, double s, const EpsilonVector& eps, double S, const Vec& z0,
                        const std::vector<Mat>& H_blocks, std::size_t n, std::size_t p) {
  return next_ntt_prime(2.0 * packed_modulus_lhs(L, s, eps, S, z0, H_blocks, n), p);
}

Envelopes envelopes(double L, double s, const ClosedLoopModel& model, const DecayCertificate& cert,
                    double beta, const Mat& M, std::size_t n_bar, const Vec& z0) {
  Envelopes e;
  const double nb = static_cast<double>(n_bar);
  const double aC = cert.alpha * inf_norm(model.C);
  const double nM = inf_norm(M);
  const double den = 1.0 - s * nb * beta / 2.0;
  e.valid = den > 0;
  e.delta = e.valid ? (s * nb / 2.0) * (aC * inf_norm(model.x0) + (L / 2.0) * aC * nM + L / 2.0) / den
                    : std::numeric_limits<double>::infinity();
  e.Delta = std::max({(L / 2.0) * nM, (s * nb / 2.0) * (inf_norm(z0) + L / 2.0), e.delta});
  e.U = aC * (inf_norm(model.x0) + (L / 2.0) * nM) + beta * e.Delta;
  e.U_hat = (L / 2.0) * aC * nM + beta * e.Delta;
  return e;
}

DesignReport design(const PlantModel& plant, const control::ControllerRealization& ctrl, double L,
                    double s, std::size_t p, std::optional<u128> configured_N) {
  DesignReport r;
  r.L = L;
  r.s = s;
  const ClosedLoopModel model = closed_loop(plant, ctrl);
  const control::TransformedController t = control::transform(ctrl);
  r.cert = decay_certificate(model.A);
  r.beta = beta_of(model, r.cert);
  r.eps = epsilon_vector(model, r.cert, t.M, t.n_bar, t.z0);
  r.S = bound_S(model, r.cert);
  r.env = envelopes(L, s, model, r.cert, r.beta, t.M, t.n_bar, t.z0);
  if (!(1.0 - r.eps[0] * s > 0)) {
    r.feasible = false;
    r.reason = "SInvalid: 1/s = " + std::to_string(1.0 / s) + " must exceed eps0 = " + std::to_string(r.eps[0]);
    return r;
  }
  r.eps_Ls = epsilon_of(L, s, r.eps);
  const auto blocks = packed::split_H(t.Hcal, t.n, t.h, t.l);
  r.N_general = min_modulus_general(L, s, r.eps, r.S, t.z0, p);
  r.N_packed = min_modulus_packed(L, s, r.eps, r.S, t.z0, blocks, t.n, p);
  r.feasible = true;
  if (configured_N) {
    const double half = static_cast<double>(*configured_N) / 2.0;
    r.configured_N_general_ok = general_modulus_lhs(L, s, r.eps, r.S, t.z0) < half;
    r.configured_N_packed_ok = packed_modulus_lhs(L, s, r.eps, r.S, t.z0, blocks, t.n) < half;
    if (!*r.configured_N_general_ok || !*r.configured_N_packed_ok) {
      r.feasible = false;
      r.reason = "configured N is below the required plaintext modulus";
    }
  }
  return r;
}

}  // namespace encctl::design
