#include "encctl/bgv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "encctl/error.hpp"

namespace encctl::bgv {

using ring::Modulus;
using ring::RingPoly;
using ring::Spectrum;

Prng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Prng(seq);
}

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  enc += o.enc;
  dec += o.dec;
  add += o.add;
  mult += o.mult;
  poly_mult += o.poly_mult;
  return *this;
}

OpCounters operator-(OpCounters a, const OpCounters& b) {
  a.enc -= b.enc;
  a.dec -= b.dec;
  a.add -= b.add;
  a.mult -= b.mult;
  a.poly_mult -= b.poly_mult;
  return a;
}

namespace {

double unit_open(Prng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
}

std::vector<i128> gaussian_coeffs(std::size_t p, double sigma, Prng& rng) {
  std::vector<i128> out(p, 0);
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < p; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit_open(rng)));
    const double theta = 2.0 * std::numbers::pi * unit_open(rng);
    out[i] = static_cast<i128>(std::floor(sigma * r * std::cos(theta) + 0.5));
    if (i + 1 < p) out[i + 1] = static_cast<i128>(std::floor(sigma * r * std::sin(theta) + 0.5));
  }
  return out;
}

RingPoly uniform_poly(const ring::ModulusPtr& mod, Prng& rng) {
  const u128 m = mod->value();
  const int bits = bit_length(m);
  const u128 mask = bits >= 128 ? ~u128{0} : (u128{1} << bits) - 1;
  std::vector<i128> c(mod->degree());
  for (auto& x : c) {
    u128 v;
    do {
      v = (static_cast<u128>(rng()) << 64 | rng()) & mask;
    } while (v >= m);
    x = 2 * v >= m ? static_cast<i128>(v) - static_cast<i128>(m) : static_cast<i128>(v);
  }
  return RingPoly::from_centered(mod, std::move(c));
}

void check_context(const Ciphertext& a, const Ciphertext& b) {
  require(a.context() == b.context() ||
              a.context()->q_ring()->same_ring(*b.context()->q_ring()),
          ErrorCode::kModulusMismatch, "ciphertexts under different parameters");
}

// Sum of products over the evaluation domain, flushing to coefficient form
// when the modulus' accumulation limit is reached.
class Accumulator {
 public:
  explicit Accumulator(const ring::ModulusPtr& mod)
      : mod_(mod), acc_(mod->zero_spectrum()), sum_(mod) {}

  void add(const Spectrum& x, const Spectrum& y) {
    if (acc_.terms == mod_->accumulation_limit()) flush();
    mod_->multiply_accumulate(acc_, x, y);
  }

  RingPoly result() {
    flush();
    return sum_;
  }

 private:
  void flush() {
    if (acc_.terms == 0) return;
    sum_ = ring::poly_add(sum_, mod_->backward(acc_, mod_));
    acc_ = mod_->zero_spectrum();
  }

  const ring::ModulusPtr& mod_;
  Spectrum acc_;
  RingPoly sum_;
};

Ciphertext product_sum(std::span<const Ciphertext> a, std::span<const Ciphertext> m,
                       OpCounters* counters) {
  require(!a.empty(), ErrorCode::kInvalidArgument, "empty product sum");
  require(a.size() == m.size(), ErrorCode::kLengthMismatch, "operand lists differ in length");
  const ContextPtr& ctx = a[0].context();
  require(a.size() <= ctx->params().r_bar, ErrorCode::kTooManyTerms,
          std::to_string(a.size()) + " terms exceed r_bar = " + std::to_string(ctx->params().r_bar));
  const Scale scale = a[0].scale() * m[0].scale();
  for (std::size_t i = 0; i < a.size(); ++i) {
    check_context(a[0], a[i]);
    check_context(a[0], m[i]);
    require(a[i].size() == 2 && m[i].size() == 2, ErrorCode::kLengthMismatch,
            "product operands must be fresh 2-polynomial ciphertexts");
    require(a[i].scale() * m[i].scale() == scale, ErrorCode::kScaleMismatch,
            "product terms carry different scales");
  }
  const auto& Q = ctx->q_ring();
  Accumulator d0(Q), d1(Q), d2(Q);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& sa = a[i].spectra();
    const auto& sm = m[i].spectra();
    const Spectrum& a0 = sa[0];
    const Spectrum& a1 = sa[1];
    const Spectrum& m0 = sm[0];
    const Spectrum& m1 = sm[1];
    d0.add(a0, m0);
    d1.add(a0, m1);
    d1.add(a1, m0);
    d2.add(a1, m1);
  }
  if (counters) {
    counters->mult += a.size();
    counters->add += a.size() - 1;
    counters->poly_mult += 4 * a.size();
  }
  return Ciphertext(ctx, {d0.result(), d1.result(), d2.result()}, scale, 1);
}

}  // namespace

Context::Context(const BgvParams& params) : params_(params) {}

std::shared_ptr<const Context> Context::create(const BgvParams& params) {
  require(params.p >= 1 && std::has_single_bit(params.p), ErrorCode::kInvalidParams,
          "ring degree p must be a power of two");
  require(params.N >= 2, ErrorCode::kInvalidParams, "plaintext modulus N must be at least 2");
  require(params.q > params.N, ErrorCode::kInvalidParams, "ciphertext modulus q must exceed N");
  require(bit_length(params.q) <= kMaxModulusBits, ErrorCode::kInvalidParams,
          "q exceeds " + std::to_string(kMaxModulusBits) + " bits");
  require(gcd(params.N, params.q) == 1, ErrorCode::kInvalidParams, "N and q must be coprime");
  require(params.sigma >= 0 && std::isfinite(params.sigma), ErrorCode::kInvalidParams,
          "sigma must be a finite non-negative number");
  require(params.r_bar >= 1, ErrorCode::kInvalidParams, "r_bar must be at least 1");
  std::shared_ptr<Context> ctx(new Context(params));
  ctx->q_mod_ = Modulus::create(params.q, params.p);
  ctx->n_mod_ = Modulus::create(params.N, params.p);
  return ctx;
}

SecretKey::SecretKey(ContextPtr ctx, RingPoly sk) : ctx_(std::move(ctx)) {
  const auto& Q = ctx_->q_ring();
  sk_spec_ = Q->forward(sk);
  Spectrum sq = Q->zero_spectrum();
  Q->multiply_accumulate(sq, sk_spec_, sk_spec_);
  RingPoly sk2 = Q->backward(sq, Q);
  sk2_spec_ = Q->forward(sk2);
  powers_ = {RingPoly::constant(Q, 1), std::move(sk), std::move(sk2)};
}

SecretKey keygen(const ContextPtr& ctx, std::uint64_t seed) {
  require(ctx != nullptr, ErrorCode::kInvalidParams, "null context");
  Prng rng = make_stream(seed, 0);
  const auto& params = ctx->params();
  return SecretKey(ctx, RingPoly::from_coeffs(ctx->q_ring(), gaussian_coeffs(params.p, params.sigma, rng)));
}

struct Ciphertext::SpectrumCache {
  std::once_flag once;
  std::vector<Spectrum> spectra;
};

Ciphertext::Ciphertext(ContextPtr ctx, std::vector<RingPoly> polys, Scale scale, int mult_depth)
    : ctx_(std::move(ctx)),
      polys_(std::move(polys)),
      scale_(scale),
      mult_depth_(mult_depth),
      cache_(std::make_shared<SpectrumCache>()) {
  require(ctx_ != nullptr, ErrorCode::kInvalidParams, "null context");
  require(polys_.size() == 2 || polys_.size() == 3, ErrorCode::kLengthMismatch,
          "ciphertexts have 2 or 3 polynomials");
  for (const auto& poly : polys_) {
    require(poly.modulus().same_ring(*ctx_->q_ring()), ErrorCode::kModulusMismatch,
            "ciphertext polynomial outside R_{p,q}");
  }
}

const std::vector<Spectrum>& Ciphertext::spectra() const {
  std::call_once(cache_->once, [this] {
    const auto& Q = ctx_->q_ring();
    cache_->spectra.reserve(polys_.size());
    for (const auto& poly : polys_) cache_->spectra.push_back(Q->forward(poly));
  });
  return cache_->spectra;
}

Ciphertext encrypt(const SecretKey& key, const RingPoly& message, Prng& rng, Scale scale,
                   OpCounters* counters) {
  const ContextPtr& ctx = key.context();
  require(message.modulus().same_ring(*ctx->plaintext_ring()), ErrorCode::kModulusMismatch,
          "message must live in the plaintext ring");
  const auto& Q = ctx->q_ring();
  const auto& params = ctx->params();
  RingPoly a = uniform_poly(Q, rng);
  Spectrum as = Q->zero_spectrum();
  Q->multiply_accumulate(as, Q->forward(a), key.sk_spectrum());
  const RingPoly a_sk = Q->backward(as, Q);
  const std::vector<i128> e = gaussian_coeffs(params.p, params.sigma, rng);
  const auto N = static_cast<i128>(params.N);
  std::vector<i128> c0(params.p);
  for (std::size_t i = 0; i < params.p; ++i) c0[i] = a_sk[i] + N * e[i] + message[i];
  if (counters) ++counters->enc;
  return Ciphertext(ctx, {RingPoly::from_coeffs(Q, std::move(c0)), ring::poly_neg(a)}, scale, 0);
}

Ciphertext encrypt_scalar(const SecretKey& key, i128 c, Prng& rng, Scale scale, OpCounters* counters) {
  return encrypt(key, RingPoly::constant(key.context()->plaintext_ring(), c), rng, scale, counters);
}

RingPoly decrypt_noise(const SecretKey& key, const Ciphertext& c) {
  const auto& Q = key.context()->q_ring();
  require(c.context()->q_ring()->same_ring(*Q), ErrorCode::kModulusMismatch, "key and ciphertext differ");
  Spectrum acc = Q->zero_spectrum();
  Q->multiply_accumulate(acc, Q->forward(c[1]), key.sk_spectrum());
  if (c.size() == 3) Q->multiply_accumulate(acc, Q->forward(c[2]), key.sk2_spectrum());
  return ring::poly_add(c[0], Q->backward(acc, Q));
}

RingPoly decrypt(const SecretKey& key, const Ciphertext& c, OpCounters* counters) {
  const RingPoly noisy = decrypt_noise(key, c);
  const auto& P = key.context()->plaintext_ring();
  std::vector<i128> m(noisy.degree());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = ring::centered_mod(noisy[i], P->value());
  if (counters) ++counters->dec;
  return RingPoly::from_centered(P, std::move(m));
}

Ciphertext hom_add(const Ciphertext& a, const Ciphertext& b, OpCounters* counters) {
  check_context(a, b);
  require(a.size() == b.size(), ErrorCode::kLengthMismatch, "cannot add ciphertexts of different lengths");
  require(a.scale() == b.scale(), ErrorCode::kScaleMismatch, "cannot add ciphertexts of different scales");
  std::vector<RingPoly> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(ring::poly_add(a[i], b[i]));
  if (counters) ++counters->add;
  return Ciphertext(a.context(), std::move(out), a.scale(), std::max(a.mult_depth(), b.mult_depth()));
}

Ciphertext hom_mul(const Ciphertext& a, const Ciphertext& b, OpCounters* counters) {
  const Ciphertext* pa = &a;
  const Ciphertext* pb = &b;
  return product_sum(std::span(pa, 1), std::span(pb, 1), counters);
}

Ciphertext plain_scalar_mul(i128 k, const Ciphertext& c, Scale k_scale, OpCounters*) {
  const u128 N = c.context()->params().N;
  const u128 mag = k < 0 ? static_cast<u128>(-k) : static_cast<u128>(k);
  require(2 * mag <= N, ErrorCode::kInvalidArgument, "plaintext scalar exceeds N/2");
  std::vector<RingPoly> out;
  out.reserve(c.size());
  for (const auto& poly : c.polys()) out.push_back(ring::poly_scale(k, poly));
  return Ciphertext(c.context(), std::move(out), c.scale() * k_scale, c.mult_depth());
}

Ciphertext prod1(std::span<const Ciphertext> a, std::span<const Ciphertext> m, OpCounters* counters) {
  return product_sum(a, m, counters);
}

Ciphertext prod2(std::span<const Ciphertext> a, std::span<const Ciphertext> m, OpCounters* counters) {
  return product_sum(a, m, counters);
}

NoiseReport validate_params(const BgvParams& params, std::size_t trials, std::uint64_t seed) {
  NoiseReport rep;
  rep.trials = trials;
  const double N = static_cast<double>(params.N);
  const double q = static_cast<double>(params.q);
  const double p = static_cast<double>(params.p);
  const double rb = static_cast<double>(params.r_bar);
  rep.coprime = params.N >= 2 && params.q >= 2 && gcd(params.N, params.q) == 1;
  rep.modulus_margin = q > N * N * p;
  rep.log2_q = std::log2(q);
  rep.log2_half_q = rep.log2_q - 1.0;
  // A fresh noise coefficient m + N e has standard deviation about N sqrt(1/12 + sigma^2).
  const double fresh_std = N * std::sqrt(1.0 / 12.0 + params.sigma * params.sigma);
  rep.log2_bound = std::log2(12.0 * std::sqrt(rb * p) * fresh_std * fresh_std);
  const double fresh_max = N / 2.0 + 6.0 * params.sigma * N;
  rep.log2_worst_case = std::log2(rb * p * fresh_max * fresh_max);

  if (!rep.coprime) {
    rep.reason = "N and q are not coprime";
    return rep;
  }
  if (!rep.modulus_margin) {
    rep.reason = "q does not exceed N^2 p";
    return rep;
  }
  if (rep.log2_bound >= rep.log2_half_q) {
    rep.reason = "noise bound 2^" + std::to_string(rep.log2_bound) + " reaches q/2";
    return rep;
  }
  ContextPtr ctx;
  try {
    ctx = Context::create(params);
  } catch (const Error& e) {
    rep.reason = e.what();
    return rep;
  }
  const SecretKey key = keygen(ctx, seed);
  Prng rng = make_stream(seed, 1);
  const auto& P = ctx->plaintext_ring();
  const u128 Nq = params.N;
  auto random_message = [&] {
    std::vector<i128> c(params.p);
    for (auto& x : c) x = static_cast<i128>(static_cast<u128>(rng()) % Nq);
    return RingPoly::from_coeffs(P, std::move(c));
  };
  double max_noise = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<Ciphertext> ca, cm;
    RingPoly expect(P);
    for (std::size_t i = 0; i < params.r_bar; ++i) {
      const RingPoly ma = random_message();
      const RingPoly mm = random_message();
      expect = ring::poly_add(expect, ring::poly_mul(ma, mm));
      ca.push_back(encrypt(key, ma, rng));
      cm.push_back(encrypt(key, mm, rng));
    }
    const Ciphertext prod = prod1(ca, cm);
    const RingPoly noisy = decrypt_noise(key, prod);
    for (i128 c : noisy.coeffs()) max_noise = std::max(max_noise, std::fabs(static_cast<double>(c)));
    if (!(decrypt(key, prod) == expect)) ++rep.failures;
  }
  rep.log2_max_observed = max_noise > 0 ? std::log2(max_noise) : 0.0;
  if (rep.failures > 0) {
    rep.reason = std::to_string(rep.failures) + " of " + std::to_string(trials) + " trials decrypted wrongly";
    return rep;
  }
  rep.pass = true;
  rep.reason = "ok";
  return rep;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u128(std::vector<std::uint8_t>& out, u128 v) {
  for (int i = 0; i < 16; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  u128 take(std::size_t width) {
    require(pos_ + width <= bytes_.size(), ErrorCode::kLengthMismatch, "truncated ciphertext");
    u128 v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= static_cast<u128>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Ciphertext& c) {
  const auto& params = c.context()->params();
  std::vector<std::uint8_t> out;
  out.reserve(40 + c.size() * (4 + 16 * params.p));
  put_u32(out, kWireMagic);
  out.push_back(static_cast<std::uint8_t>(kWireVersion));
  out.push_back(static_cast<std::uint8_t>(kWireVersion >> 8));
  out.push_back(static_cast<std::uint8_t>(c.size()));
  out.push_back(16);
  put_u32(out, static_cast<std::uint32_t>(params.p));
  put_u32(out, static_cast<std::uint32_t>(c.scale().signal_exp));
  put_u32(out, static_cast<std::uint32_t>(c.scale().gain_exp));
  put_u32(out, static_cast<std::uint32_t>(c.mult_depth()));
  put_u128(out, params.q);
  for (const auto& poly : c.polys()) {
    put_u32(out, static_cast<std::uint32_t>(poly.degree()));
    for (i128 coeff : poly.coeffs()) put_u128(out, static_cast<u128>(coeff));
  }
  return out;
}

Ciphertext deserialize(const ContextPtr& ctx, std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  require(static_cast<std::uint32_t>(r.take(4)) == kWireMagic, ErrorCode::kInvalidArgument, "bad magic");
  require(static_cast<std::uint16_t>(r.take(2)) == kWireVersion, ErrorCode::kInvalidArgument,
          "unsupported wire version");
  const auto count = static_cast<std::size_t>(r.take(1));
  require(static_cast<int>(r.take(1)) == 16, ErrorCode::kInvalidArgument, "unsupported coefficient width");
  const auto p = static_cast<std::size_t>(r.take(4));
  Scale scale;
  scale.signal_exp = static_cast<std::int32_t>(static_cast<std::uint32_t>(r.take(4)));
  scale.gain_exp = static_cast<std::int32_t>(static_cast<std::uint32_t>(r.take(4)));
  const auto depth = static_cast<int>(static_cast<std::uint32_t>(r.take(4)));
  const u128 q = r.take(16);
  require(p == ctx->params().p && q == ctx->params().q, ErrorCode::kModulusMismatch,
          "ciphertext parameters differ from the context");
  std::vector<RingPoly> polys;
  for (std::size_t k = 0; k < count; ++k) {
    const auto len = static_cast<std::size_t>(r.take(4));
    require(len == p, ErrorCode::kLengthMismatch, "polynomial length differs from p");
    std::vector<i128> coeffs(len);
    for (auto& c : coeffs) c = static_cast<i128>(r.take(16));
    polys.push_back(RingPoly::from_coeffs(ctx->q_ring(), std::move(coeffs)));
  }
  require(r.done(), ErrorCode::kLengthMismatch, "trailing bytes after ciphertext");
  return Ciphertext(ctx, std::move(polys), scale, depth);
}

}  // namespace encctl::bgv
