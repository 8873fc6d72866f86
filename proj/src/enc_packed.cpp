#include "encctl/enc_packed.hpp"

#include <utility>

#include "encctl/error.hpp"

namespace encctl::packed {

Layout make_layout(std::size_t n, std::size_t h, std::size_t l, std::size_t p) {
  require(n >= 1 && h >= 1 && l >= 1, ErrorCode::kDimMismatch, "n, h, l must be positive");
  Layout layout{n, h, l, p};
  require(p >= layout.active_slots(), ErrorCode::kDimMismatch,
          "p = " + std::to_string(p) + " is below h max(h, l) = " + std::to_string(layout.active_slots()));
  return layout;
}

std::vector<Mat> split_H(const Mat& Hcal, std::size_t n, std::size_t h, std::size_t l) {
  const auto N = static_cast<Eigen::Index>(n), H = static_cast<Eigen::Index>(h),
             Lw = static_cast<Eigen::Index>(l);
  require(Hcal.rows() == H && Hcal.cols() == N * (Lw + H), ErrorCode::kDimMismatch,
          "Hcal must be h x n(l + h)");
  std::vector<Mat> blocks;
  blocks.reserve(2 * n);
  for (Eigen::Index i = 0; i < N; ++i) blocks.push_back(Hcal.middleCols(i * Lw, Lw));
  for (Eigen::Index i = 0; i < N; ++i) blocks.push_back(Hcal.middleCols(N * Lw + i * H, H));
  return blocks;
}

std::vector<i128> vectorize_pad(const std::vector<i128>& Hi, std::size_t rows, std::size_t cols,
                                const Layout& layout) {
  require(rows == layout.h && (cols == layout.h || cols == layout.l) && Hi.size() == rows * cols,
          ErrorCode::kDimMismatch, "gain block must be h x h or h x l");
  const std::size_t w = layout.width();
  std::vector<i128> out(layout.p, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[r * w + j] = Hi[r * cols + j];
  return out;
}

std::vector<i128> duplicate_pad(const std::vector<i128>& x, const Layout& layout) {
  require(x.size() == layout.h || x.size() == layout.l, ErrorCode::kDimMismatch,
          "signal length must be h or l");
  const std::size_t w = layout.width();
  std::vector<i128> out(layout.p, 0);
  for (std::size_t r = 0; r < layout.h; ++r)
    for (std::size_t j = 0; j < x.size(); ++j) out[r * w + j] = x[j];
  return out;
}

std::vector<i128> partition_sum(const std::vector<i128>& slots, const Layout& layout) {
  require(slots.size() == layout.p, ErrorCode::kLengthMismatch, "slot vector must have length p");
  const std::size_t w = layout.width();
  std::vector<i128> out(layout.h, 0);
  for (std::size_t r = 0; r < layout.h; ++r)
    for (std::size_t j = 0; j < w; ++j) out[r] += slots[r * w + j];
  return out;
}

Ciphertext duplicate_pack_encrypt(const Eigen::VectorXd& x, const quant::QuantParams& qp,
                                  const packing::PackingContext& pack, const Layout& layout,
                                  const bgv::SecretKey& key, bgv::Prng& rng, bgv::OpCounters* counters) {
  require(layout.h * static_cast<std::size_t>(x.size()) <= layout.p, ErrorCode::kDimMismatch,
          "duplicated signal does not fit in p slots");
  const auto q = quant::quantize(x, qp.L, qp.N, qp.mode);
  return bgv::encrypt(key, pack.pack(duplicate_pad(q.values, layout)), rng, bgv::kSignalScale, counters);
}

ActuatorOutput actuator_partition_sum(const Ciphertext& u_bar, const bgv::SecretKey& key,
                                      const quant::QuantParams& qp, const packing::PackingContext& pack,
                                      const Layout& layout, bgv::Prng& rng, bgv::OpCounters* counters) {
  require(u_bar.scale() == bgv::kSignalScale * bgv::kGainScale, ErrorCode::kScaleMismatch,
          "actuator expects scale 1/(L s)");
  const ring::RingPoly m = bgv::decrypt(key, u_bar, counters);
  std::vector<i128> slots = pack.unpack(m);
  std::vector<i128> u_int = partition_sum(slots, layout);
  Eigen::VectorXd u = quant::rescale(u_int, qp.L, qp.s);
  auto requant = quant::quantize(u, qp.L, qp.N, qp.mode).values;
  Ciphertext enc = bgv::encrypt(key, pack.pack(duplicate_pad(requant, layout)), rng, bgv::kSignalScale, counters);
  return {std::move(u), std::move(slots), std::move(u_int), std::move(requant), std::move(enc)};
}

PackedEncController PackedEncController::setup(const bgv::SecretKey& key, const control::TransformedController& t,
                                               const quant::QuantParams& qp, const packing::PackingContext& pack,
                                               bgv::Prng& rng) {
  quant::validate(qp);
  const auto& params = key.context()->params();
  require(qp.N == params.N && pack.plaintext_modulus() == params.N, ErrorCode::kModulusMismatch,
          "quantization, packing and BGV must share N");
  require(2 * t.n <= params.r_bar, ErrorCode::kTooManyTerms,
          "2n = " + std::to_string(2 * t.n) + " exceeds r_bar = " + std::to_string(params.r_bar));
  PackedEncController c(make_layout(t.n, t.h, t.l, params.p));
  const auto blocks = split_H(t.Hcal, t.n, t.h, t.l);
  c.H_.reserve(blocks.size());
  for (const auto& b : blocks) {
    Eigen::VectorXd flat(b.size());
    for (Eigen::Index r = 0, k = 0; r < b.rows(); ++r)
      for (Eigen::Index j = 0; j < b.cols(); ++j) flat(k++) = b(r, j);
    const auto q = quant::quantize(flat, qp.s, qp.N, quant::RangeMode::kStrict).values;
    const auto slots = vectorize_pad(q, static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(b.cols()),
                                     c.layout_);
    c.H_.push_back(bgv::encrypt(key, pack.pack(slots), rng, bgv::kGainScale));
  }
  // z0 chunks follow the container order: n chunks of length l, then n of length h.
  const auto n = static_cast<Eigen::Index>(t.n), l = static_cast<Eigen::Index>(t.l),
             h = static_cast<Eigen::Index>(t.h);
  c.z_.reserve(2 * t.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd chunk = t.z0.segment(i * l, l);
    const auto q = quant::quantize(chunk, qp.L, qp.N, quant::RangeMode::kStrict);
    c.z_.push_back(bgv::encrypt(key, pack.pack(duplicate_pad(q.values, c.layout_)), rng, bgv::kSignalScale));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd chunk = t.z0.segment(n * l + i * h, h);
    const auto q = quant::quantize(chunk, qp.L, qp.N, quant::RangeMode::kStrict);
    c.z_.push_back(bgv::encrypt(key, pack.pack(duplicate_pad(q.values, c.layout_)), rng, bgv::kSignalScale));
  }
  return c;
}

Ciphertext PackedEncController::output(bgv::OpCounters* counters) const {
  for (const auto& c : z_) {
    require(c.size() == 2 && c.mult_depth() == 0, ErrorCode::kInternal, "container entry is not fresh");
  }
  return bgv::prod2(H_, z_, counters);
}

void PackedEncController::update(Ciphertext y_enc, Ciphertext u_enc) {
  for (const Ciphertext* c : {&y_enc, &u_enc}) {
    require(c->size() == 2 && c->mult_depth() == 0, ErrorCode::kInvalidArgument, "inputs must be fresh");
    require(c->scale() == bgv::kSignalScale, ErrorCode::kScaleMismatch, "inputs must carry scale 1/L");
  }
  const std::size_t n = layout_.n;
  for (std::size_t i = n - 1; i >= 1; --i) {
    z_[i] = z_[i - 1];
    z_[n + i] = z_[n + i - 1];
  }
  z_[0] = std::move(y_enc);
  z_[n] = std::move(u_enc);
  ++step_;
}

general::StorageCounts PackedEncController::storage() const {
  general::StorageCounts s;
  for (const auto& c : z_) s.z += c.size();
  for (const auto& c : H_) s.H += c.size();
  return s;
}

}  // namespace encctl::packed
