#include "encctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "encctl/error.hpp"

namespace encctl::control {

double inf_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::size_t numerical_rank(const Mat& A) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double thresh = kRankTolerance * sv(0);
  return static_cast<std::size_t>((sv.array() > thresh).count());
}

double spectral_radius(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat controllability_matrix(const Mat& F, const Mat& G) {
  const Eigen::Index n = F.rows(), m = G.cols();
  Mat W(n, n * m);
  Mat blk = G;
  for (Eigen::Index i = 0; i < n; ++i) {
    W.middleCols(i * m, m) = blk;
    blk = F * blk;
  }
  return W;
}

Mat observability_matrix(const Mat& F, const Mat& H) {
  return controllability_matrix(F.transpose(), H.transpose()).transpose();
}

namespace {

// Up to this many outputs every ordering is tried in deadbeat_gains.
constexpr Eigen::Index kMaxPermutedOutputs = 4;

double nilpotency_residual(const Mat& F, const Mat& H, const Mat& R) {
  const Mat Fb = F - R * H;
  Mat P = Mat::Identity(F.rows(), F.rows());
  for (Eigen::Index i = 0; i < F.rows(); ++i) P = P * Fb;
  return inf_norm(P);
}

Mat luenberger_gain(const Mat& F, const Mat& H) {
  const Eigen::Index n = F.rows();
  const Eigen::Index h = H.rows();
  // Dual pair (A, B) = (F^T, H^T); find K with A - B K nilpotent, then R = K^T.
  const Mat A = F.transpose();
  const Mat B = H.transpose();

  // Controllability indices in crate order: b_1..b_h, A b_1..A b_h, ...
  std::vector<int> mu(static_cast<std::size_t>(h), 0);
  std::vector<bool> open(static_cast<std::size_t>(h), true);
  Mat chosen(n, 0);
  std::vector<Vec> powers(static_cast<std::size_t>(h));
  for (Eigen::Index j = 0; j < h; ++j) powers[j] = B.col(j);
  for (Eigen::Index k = 0; k < n && chosen.cols() < n; ++k) {
    for (Eigen::Index j = 0; j < h && chosen.cols() < n; ++j) {
      if (!open[j]) continue;
      Mat trial(n, chosen.cols() + 1);
      trial << chosen, powers[j];
      if (numerical_rank(trial) > static_cast<std::size_t>(chosen.cols())) {
        chosen = trial;
        ++mu[j];
        powers[j] = A * powers[j];
      } else {
        open[j] = false;
      }
    }
  }
  if (chosen.cols() < n) {
    fail(ErrorCode::kNotObservable, "(F, H) is not observable: rank " + std::to_string(chosen.cols()) +
                                        " < " + std::to_string(n));
  }

  // Luenberger ordering: [b_j, A b_j, ..., A^(mu_j-1) b_j] grouped by input.
  Mat Cm(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < h; ++j) {
    Vec v = B.col(j);
    for (int i = 0; i < mu[j]; ++i) {
      Cm.col(col++) = v;
      v = A * v;
    }
  }
  const Mat Cinv = Cm.inverse();

  std::vector<Eigen::Index> active;
  Mat Q(0, n);
  Eigen::Index sigma = 0;
  for (Eigen::Index j = 0; j < h; ++j) {
    if (mu[j] == 0) continue;
    sigma += mu[j];
    Eigen::RowVectorXd q = Cinv.row(sigma - 1);
    for (int i = 1; i < mu[j]; ++i) q = q * A;
    Q.conservativeResize(Q.rows() + 1, Eigen::NoChange);
    Q.row(Q.rows() - 1) = q;
    active.push_back(j);
  }
  Mat Bact(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) Bact.col(static_cast<Eigen::Index>(i)) = B.col(active[i]);
  const Mat Kact = (Q * Bact).inverse() * (Q * A);
  Mat K = Mat::Zero(h, n);
  for (std::size_t i = 0; i < active.size(); ++i) K.row(active[i]) = Kact.row(static_cast<Eigen::Index>(i));
  return K.transpose();
}

}  // namespace

Mat deadbeat_gain(const Mat& F, const Mat& H) { return luenberger_gain(F, H); }

std::vector<Mat> deadbeat_gains(const Mat& F, const Mat& H) {
  const Eigen::Index h = H.rows();
  std::vector<Mat> out{luenberger_gain(F, H)};
  if (h < 2 || h > kMaxPermutedOutputs) return out;
  const double limit = kNilpotencyTolerance * std::pow(inf_norm(F), static_cast<double>(F.rows()));
  Eigen::PermutationMatrix<Eigen::Dynamic> P(h);
  P.setIdentity();
  auto& order = P.indices();
  while (std::next_permutation(order.data(), order.data() + h)) {
    Mat R = luenberger_gain(F, P * H) * P;
    if (nilpotency_residual(F, H, R) <= limit) out.push_back(std::move(R));
  }
  return out;
}

Mat build_M(const Mat& F, const Mat& G, const Mat& H, const Mat& R) {
  const Eigen::Index n = F.rows(), l = G.cols(), h = H.rows();
  const Mat Fb = F - R * H;
  Mat M(n, n * (l + h));
  Mat gy = G, gu = R;
  for (Eigen::Index i = 0; i < n; ++i) {
    M.middleCols(i * l, l) = gy;
    M.middleCols(n * l + i * h, h) = gu;
    gy = Fb * gy;
    gu = Fb * gu;
  }
  return M;
}

Vec build_z0(const Mat& F, const Mat& G, const Mat& H, const Mat& R, const Vec& x0) {
  (void)R;
  const Eigen::Index n = F.rows(), l = G.cols(), h = H.rows();
  // x(0) = sum_{i=1}^n F^(i-1) G y(-i) because u = H x folds R back into F.
  const Mat W = controllability_matrix(F, G);
  if (numerical_rank(W) < static_cast<std::size_t>(n)) {
    fail(ErrorCode::kNotControllable, "(F, G) is not controllable");
  }
  const Vec Y = W.completeOrthogonalDecomposition().solve(x0);  // minimum norm
  Vec z0(n * (l + h));
  Vec x = Vec::Zero(n);  // x(-n)
  for (Eigen::Index i = n; i >= 1; --i) {
    const Vec y = Y.segment((i - 1) * l, l);
    const Vec u = H * x;
    z0.segment((i - 1) * l, l) = y;
    z0.segment(n * l + (i - 1) * h, h) = u;
    x = F * x + G * y;
  }
  return z0;
}

Structural build_structural(std::size_t n, std::size_t h, std::size_t l) {
  require(n >= 1 && h >= 1 && l >= 1, ErrorCode::kDimMismatch, "structural matrices need n, h, l >= 1");
  const auto N = static_cast<Eigen::Index>(n), H = static_cast<Eigen::Index>(h),
             Lw = static_cast<Eigen::Index>(l);
  const Eigen::Index nb = N * (H + Lw);
  Structural s{IMat::Zero(nb, nb), IMat::Zero(nb, Lw), IMat::Zero(nb, H)};
  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    s.Fcal.block((i + 1) * Lw, i * Lw, Lw, Lw).setIdentity();
    s.Fcal.block(N * Lw + (i + 1) * H, N * Lw + i * H, H, H).setIdentity();
  }
  s.Gcal.topRows(Lw).setIdentity();
  s.Rcal.block(N * Lw, 0, H, H).setIdentity();
  return s;
}

Vec structural_update(const Structural& s, const Vec& z, const Vec& y, const Vec& u) {
  return s.Fcal.cast<double>() * z + s.Gcal.cast<double>() * y + s.Rcal.cast<double>() * u;
}

TransformedController transform(const ControllerRealization& ctrl) {
  const Eigen::Index n = ctrl.F.rows();
  require(n >= 1 && ctrl.F.cols() == n, ErrorCode::kDimMismatch, "F must be square and non-empty");
  require(ctrl.G.rows() == n && ctrl.G.cols() >= 1, ErrorCode::kDimMismatch, "G must have n rows");
  require(ctrl.H.cols() == n && ctrl.H.rows() >= 1, ErrorCode::kDimMismatch, "H must have n columns");
  require(ctrl.x0.size() == n, ErrorCode::kDimMismatch, "x0 must have length n");

  TransformedController t;
  t.n = ctrl.n();
  t.h = ctrl.h();
  t.l = ctrl.l();
  t.n_bar = t.n * (t.h + t.l);
  // Among the candidate gains keep the one with the smallest ||H M||, the
  // gain from container quantization error to the controller output.
  double best = std::numeric_limits<double>::infinity();
  for (auto& R : deadbeat_gains(ctrl.F, ctrl.H)) {
    const double norm = inf_norm(Mat(ctrl.H * build_M(ctrl.F, ctrl.G, ctrl.H, R)));
    if (norm < best) {
      best = norm;
      t.R = std::move(R);
    }
  }
  t.nilpotency_residual = nilpotency_residual(ctrl.F, ctrl.H, t.R);
  const double scale = std::pow(inf_norm(ctrl.F), static_cast<double>(n));
  require(t.nilpotency_residual <= kNilpotencyTolerance * scale, ErrorCode::kInternal,
          "deadbeat gain failed the nilpotency check");
  t.M = build_M(ctrl.F, ctrl.G, ctrl.H, t.R);
  t.z0 = build_z0(ctrl.F, ctrl.G, ctrl.H, t.R, ctrl.x0);
  t.Hcal = ctrl.H * t.M;
  t.structural = build_structural(t.n, t.h, t.l);
  return t;
}

}  // namespace encctl::control
