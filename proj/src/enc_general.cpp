#include "encctl/enc_general.hpp"

#include <utility>

#include "encctl/error.hpp"

namespace encctl::general {

namespace {

void require_fresh(const std::vector<Ciphertext>& v, std::size_t expected, const char* what) {
  require(v.size() == expected, ErrorCode::kDimMismatch,
          std::string(what) + " must hold " + std::to_string(expected) + " ciphertexts");
  for (const auto& c : v) {
    require(c.size() == 2 && c.mult_depth() == 0, ErrorCode::kInvalidArgument,
            std::string(what) + " must be fresh ciphertexts");
    require(c.scale() == bgv::kSignalScale, ErrorCode::kScaleMismatch,
            std::string(what) + " must carry scale 1/L");
  }
}

}  // namespace

std::vector<Ciphertext> sensor_encrypt(const Eigen::VectorXd& y, const quant::QuantParams& qp,
                                       const bgv::SecretKey& key, bgv::Prng& rng,
                                       bgv::OpCounters* counters) {
  const auto q = quant::quantize(y, qp.L, qp.N, qp.mode);
  std::vector<Ciphertext> out;
  out.reserve(q.values.size());
  for (i128 v : q.values) out.push_back(bgv::encrypt_scalar(key, v, rng, bgv::kSignalScale, counters));
  return out;
}

ActuatorOutput actuator_step(const std::vector<Ciphertext>& u_bar, const bgv::SecretKey& key,
                             const quant::QuantParams& qp, bgv::Prng& rng,
                             bgv::OpCounters* counters) {
  ActuatorOutput out;
  out.u_int.reserve(u_bar.size());
  for (const auto& c : u_bar) {
    require(c.scale() == bgv::kSignalScale * bgv::kGainScale, ErrorCode::kScaleMismatch,
            "actuator expects scale 1/(L s)");
    out.u_int.push_back(bgv::decrypt(key, c, counters)[0]);
  }
  out.u = quant::rescale(out.u_int, qp.L, qp.s);
  out.u_requant = quant::quantize(out.u, qp.L, qp.N, qp.mode).values;
  out.u_enc.reserve(out.u_requant.size());
  for (i128 v : out.u_requant)
    out.u_enc.push_back(bgv::encrypt_scalar(key, v, rng, bgv::kSignalScale, counters));
  return out;
}

GeneralEncController GeneralEncController::setup(const bgv::SecretKey& key,
                                                 const control::TransformedController& t,
                                                 const quant::QuantParams& qp, bgv::Prng& rng) {
  quant::validate(qp);
  const auto& params = key.context()->params();
  require(qp.N == params.N, ErrorCode::kModulusMismatch, "quantization N differs from the BGV plaintext modulus");
  require(t.n_bar <= params.r_bar, ErrorCode::kTooManyTerms,
          "n_bar = " + std::to_string(t.n_bar) + " exceeds r_bar = " + std::to_string(params.r_bar));
  GeneralEncController c;
  c.n_ = t.n;
  c.h_ = t.h;
  c.l_ = t.l;
  c.structural_ = t.structural;
  // Gains are quantized in strict mode regardless of the signal mode.
  c.H_.resize(t.h);
  for (std::size_t i = 0; i < t.h; ++i) {
    const Eigen::VectorXd row = t.Hcal.row(static_cast<Eigen::Index>(i)).transpose();
    const auto q = quant::quantize(row, qp.s, qp.N, quant::RangeMode::kStrict);
    c.H_[i].reserve(t.n_bar);
    for (i128 v : q.values) c.H_[i].push_back(bgv::encrypt_scalar(key, v, rng, bgv::kGainScale));
  }
  const auto z = quant::quantize(t.z0, qp.L, qp.N, quant::RangeMode::kStrict);
  c.z_.reserve(t.n_bar);
  for (i128 v : z.values) c.z_.push_back(bgv::encrypt_scalar(key, v, rng, bgv::kSignalScale));
  return c;
}

std::vector<Ciphertext> GeneralEncController::output(bgv::OpCounters* counters) const {
  for (const auto& c : z_) {
    require(c.size() == 2 && c.mult_depth() == 0, ErrorCode::kInternal, "container entry is not fresh");
  }
  std::vector<Ciphertext> out;
  out.reserve(h_);
  for (const auto& row : H_) out.push_back(bgv::prod1(row, z_, counters));
  return out;
}

void GeneralEncController::update(std::vector<Ciphertext> y_enc, std::vector<Ciphertext> u_enc) {
  require_fresh(y_enc, l_, "y(k)");
  require_fresh(u_enc, h_, "u(k)");
  const std::size_t ny = n_ * l_;
  std::vector<Ciphertext> next;
  next.reserve(z_.size());
  for (auto& c : y_enc) next.push_back(std::move(c));
  for (std::size_t i = 0; i + l_ < ny; ++i) next.push_back(z_[i]);
  for (auto& c : u_enc) next.push_back(std::move(c));
  for (std::size_t i = 0; i + h_ < n_ * h_; ++i) next.push_back(z_[ny + i]);
  z_ = std::move(next);
  ++step_;
}

void GeneralEncController::update_structural(const std::vector<Ciphertext>& y_enc,
                                             const std::vector<Ciphertext>& u_enc) {
  require_fresh(y_enc, l_, "y(k)");
  require_fresh(u_enc, h_, "u(k)");
  const auto nb = static_cast<Eigen::Index>(z_.size());
  std::vector<Ciphertext> next;
  next.reserve(z_.size());
  for (Eigen::Index i = 0; i < nb; ++i) {
    std::vector<std::pair<int, const Ciphertext*>> terms;
    for (Eigen::Index j = 0; j < nb; ++j)
      if (int w = structural_.Fcal(i, j)) terms.emplace_back(w, &z_[j]);
    for (Eigen::Index j = 0; j < structural_.Gcal.cols(); ++j)
      if (int w = structural_.Gcal(i, j)) terms.emplace_back(w, &y_enc[j]);
    for (Eigen::Index j = 0; j < structural_.Rcal.cols(); ++j)
      if (int w = structural_.Rcal(i, j)) terms.emplace_back(w, &u_enc[j]);
    require(!terms.empty(), ErrorCode::kInternal, "structural row without a source");
    auto term = [](const std::pair<int, const Ciphertext*>& t) {
      return t.first == 1 ? *t.second : bgv::plain_scalar_mul(t.first, *t.second);
    };
    Ciphertext acc = term(terms[0]);
    for (std::size_t k = 1; k < terms.size(); ++k) acc = bgv::hom_add(acc, term(terms[k]));
    next.push_back(std::move(acc));
  }
  z_ = std::move(next);
  ++step_;
}

StorageCounts GeneralEncController::storage() const {
  StorageCounts s;
  for (const auto& c : z_) s.z += c.size();
  for (const auto& row : H_)
    for (const auto& c : row) s.H += c.size();
  return s;
}

}  // namespace encctl::general
