#pragma once

// Input/output re-realization of a linear controller
//
//   x(k+1) = F x(k) + G y(k),  u(k) = H x(k),  x(0) = x0
//
// into the finite-memory form
//
//   z(k+1) = Fcal z(k) + Gcal y(k) + Rcal u(k),  u(k) = Hcal z(k),  z(0) = z0
//
// where z(k) stacks y(k-1..k-n) then u(k-1..k-n), newest first, and
// x(k) = M z(k). M comes from a deadbeat output-injection gain R that makes
// F - R H nilpotent.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace encctl::control {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IMat = Eigen::MatrixXi;

/// Singular values below kRankTolerance * sigma_max count as zero.
inline constexpr double kRankTolerance = 1e-9;
/// ||(F - R H)^n|| must not exceed kNilpotencyTolerance * ||F||^n.
inline constexpr double kNilpotencyTolerance = 1e-8;

struct ControllerRealization {
  Mat F;
  Mat G;
  Mat H;
  Vec x0;

  std::size_t n() const { return static_cast<std::size_t>(F.rows()); }
  std::size_t l() const { return static_cast<std::size_t>(G.cols()); }
  std::size_t h() const { return static_cast<std::size_t>(H.rows()); }
};

struct Structural {
  IMat Fcal;  // n_bar x n_bar block shift
  IMat Gcal;  // n_bar x l, identity on the newest y block
  IMat Rcal;  // n_bar x h, identity on the newest u block
};

struct TransformedController {
  std::size_t n = 0, h = 0, l = 0, n_bar = 0;
  Mat R;
  Mat M;
  Vec z0;
  Mat Hcal;
  Structural structural;
  double nilpotency_residual = 0;
};

double inf_norm(const Mat& A);
double inf_norm(const Vec& v);
std::size_t numerical_rank(const Mat& A);
/// Spectral radius via the eigenvalues of A.
double spectral_radius(const Mat& A);

Mat controllability_matrix(const Mat& F, const Mat& G);
Mat observability_matrix(const Mat& F, const Mat& H);

/// R with F - R H nilpotent, outputs taken in their given order. Throws kNotObservable.
Mat deadbeat_gain(const Mat& F, const Mat& H);
/// deadbeat_gain for every ordering of the outputs (given order first) when
/// h <= 4, keeping those that pass the nilpotency check.
std::vector<Mat> deadbeat_gains(const Mat& F, const Mat& H);
/// M = [G, Fb G, ..., Fb^(n-1) G | R, Fb R, ..., Fb^(n-1) R], Fb = F - R H.
Mat build_M(const Mat& F, const Mat& G, const Mat& H, const Mat& R);
/// Minimum-norm past inputs y(-1..-n) steering x(-n) = 0 to x(0) = x0 under
/// the controller dynamics, followed by the virtual u(-i) = H x(-i).
/// Throws kNotControllable.
Vec build_z0(const Mat& F, const Mat& G, const Mat& H, const Mat& R, const Vec& x0);
Structural build_structural(std::size_t n, std::size_t h, std::size_t l);

/// Validates dimensions (kDimMismatch) and runs the whole pipeline.
TransformedController transform(const ControllerRealization& ctrl);

/// Applies one container update with the literal 0/1 matrices.
Vec structural_update(const Structural& s, const Vec& z, const Vec& y, const Vec& u);

}  // namespace encctl::control
