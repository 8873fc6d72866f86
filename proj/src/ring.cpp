#include "encctl/ring.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "encctl/error.hpp"

namespace encctl::ring {

namespace {

constexpr int kLimbBits = 21;
constexpr int kLimbs = 3;
constexpr std::uint64_t kLimbMask = (std::uint64_t{1} << kLimbBits) - 1;
constexpr int kAuxPrimeBits = 62;

std::uint64_t shoup_factor(std::uint64_t w, std::uint64_t P) {
  return static_cast<std::uint64_t>((static_cast<u128>(w) << 64) / P);
}

// a * w mod P for any a < 2^64, P < 2^63.
inline std::uint64_t mul_shoup(std::uint64_t a, std::uint64_t w, std::uint64_t wp,
                               std::uint64_t P) {
  const auto q = static_cast<std::uint64_t>((static_cast<u128>(a) * wp) >> 64);
  const std::uint64_t r = a * w - q * P;
  return r >= P ? r - P : r;
}

// Same product left in [0, 2P).
inline std::uint64_t mul_shoup_lazy(std::uint64_t a, std::uint64_t w, std::uint64_t wp,
                                    std::uint64_t P) {
  const auto q = static_cast<std::uint64_t>((static_cast<u128>(a) * wp) >> 64);
  return a * w - q * P;
}

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t P) {
  const std::uint64_t s = a + b;
  return s >= P ? s - P : s;
}

inline std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t P) {
  return a >= b ? a - b : a + P - b;
}

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

// s in (-m, m) -> centered representative.
inline i128 center_small(i128 s, u128 m) {
  if (s < 0) s += static_cast<i128>(m);
  if (2 * static_cast<u128>(s) >= m) s -= static_cast<i128>(m);
  return s;
}

inline u128 to_residue(i128 x, u128 m) {
  return x < 0 ? static_cast<u128>(x + static_cast<i128>(m)) : static_cast<u128>(x);
}

inline i128 from_residue(u128 r, u128 m) {
  return 2 * r >= m ? static_cast<i128>(r) - static_cast<i128>(m) : static_cast<i128>(r);
}

}  // namespace

i128 centered_mod(i128 z, u128 m) noexcept {
  const auto mm = static_cast<i128>(m);
  if (z > -mm && z < mm) return center_small(z, m);
  i128 r = z % mm;
  if (r < 0) r += mm;
  if (2 * static_cast<u128>(r) >= m) r -= mm;
  return r;
}

u128 find_primitive_root(u128 m, std::size_t p) {
  require(p >= 1, ErrorCode::kInvalidArgument, "ring degree must be positive");
  const u128 order = 2 * static_cast<u128>(p);
  if (m < 3 || (m - 1) % order != 0) {
    fail(ErrorCode::kNoRoot, "modulus " + to_string(m) + " is not 1 mod " + to_string(order));
  }
  if (!is_probable_prime(m)) {
    fail(ErrorCode::kNoRoot, "modulus " + to_string(m) + " is not prime");
  }
  const u128 cofactor = (m - 1) / order;
  u128 zeta0 = 0;
  for (u128 x = 2; x < m && x < 1'000'000; ++x) {
    const u128 cand = pow_mod(x, cofactor, m);
    if (pow_mod(cand, p, m) == m - 1) {
      zeta0 = cand;
      break;
    }
  }
  if (zeta0 == 0) fail(ErrorCode::kNoRoot, "no primitive root found below search limit");
  // All primitive 2p-th roots are the odd powers of any one of them.
  const u128 step = mul_mod(zeta0, zeta0, m);
  u128 cur = zeta0;
  u128 best = zeta0;
  for (std::size_t k = 1; k < p; ++k) {
    cur = mul_mod(cur, step, m);
    best = std::min(best, cur);
  }
  return best;
}

// Negacyclic NTT over a single word-sized prime.
class NttTable {
 public:
  NttTable(std::uint64_t prime, std::size_t n, std::uint64_t psi) : P_(prime), n_(n) {
    logn_ = std::countr_zero(n);
    psi_rev_.resize(n);
    psi_inv_rev_.resize(n);
    psi_rev_shoup_.resize(n);
    psi_inv_rev_shoup_.resize(n);
    const auto psi_inv = static_cast<std::uint64_t>(inv_mod(psi, P_));
    std::uint64_t pw = 1, pw_inv = 1;
    std::vector<std::uint64_t> pows(n), pows_inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      pows[i] = pw;
      pows_inv[i] = pw_inv;
      pw = mul(pw, psi);
      pw_inv = mul(pw_inv, psi_inv);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = bit_reverse(i, logn_);
      psi_rev_[i] = pows[r];
      psi_inv_rev_[i] = pows_inv[r];
      psi_rev_shoup_[i] = shoup_factor(psi_rev_[i], P_);
      psi_inv_rev_shoup_[i] = shoup_factor(psi_inv_rev_[i], P_);
    }
    n_inv_ = static_cast<std::uint64_t>(inv_mod(n, P_));
    n_inv_shoup_ = shoup_factor(n_inv_, P_);
    two64_ = static_cast<std::uint64_t>((u128{1} << 64) % P_);
    two64_shoup_ = shoup_factor(two64_, P_);
    one_shoup_ = shoup_factor(1, P_);
    bits_ = bit_length(P_);
    barrett_mu_ = static_cast<std::uint64_t>((u128{1} << (2 * bits_)) / P_);
  }

  std::uint64_t prime() const { return P_; }
  std::size_t size() const { return n_; }
  int log_size() const { return logn_; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % P_);
  }

  // Barrett reduction of x < P^2.
  std::uint64_t reduce_product(u128 x) const {
    const auto hi = static_cast<std::uint64_t>(x >> (bits_ - 1));
    const u128 q = (static_cast<u128>(hi) * barrett_mu_) >> (bits_ + 1);
    auto r = static_cast<std::uint64_t>(x - q * P_);
    while (r >= P_) r -= P_;
    return r;
  }

  std::uint64_t reduce_word(std::uint64_t x) const { return mul_shoup(x, 1, one_shoup_, P_); }

  std::uint64_t reduce_signed(i128 x) const {
    const bool neg = x < 0;
    const u128 ax = neg ? static_cast<u128>(-x) : static_cast<u128>(x);
    const auto hi = static_cast<std::uint64_t>(ax >> 64);
    std::uint64_t r = mul_shoup(static_cast<std::uint64_t>(ax), 1, one_shoup_, P_);
    if (hi != 0) r = add_mod(r, mul_shoup(hi, two64_, two64_shoup_, P_), P_);
    return neg && r != 0 ? P_ - r : r;
  }

  // Output index k holds a(psi^(2 bitrev(k) + 1)). Butterflies keep values
  // lazily in [0, 4P) and normalize once at the end.
  void forward(std::uint64_t* a) const {
    const std::uint64_t two_p = 2 * P_;
    std::size_t t = n_;
    for (std::size_t m = 1; m < n_; m <<= 1) {
      t >>= 1;
      for (std::size_t i = 0; i < m; ++i) {
        std::uint64_t* x = a + 2 * i * t;
        std::uint64_t* y = x + t;
        const std::uint64_t w = psi_rev_[m + i];
        const std::uint64_t wp = psi_rev_shoup_[m + i];
        for (std::size_t j = 0; j < t; ++j) {
          std::uint64_t u = x[j];
          if (u >= two_p) u -= two_p;
          const std::uint64_t v = mul_shoup_lazy(y[j], w, wp, P_);
          x[j] = u + v;
          y[j] = u - v + two_p;
        }
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      std::uint64_t u = a[j];
      if (u >= two_p) u -= two_p;
      if (u >= P_) u -= P_;
      a[j] = u;
    }
  }

  void inverse(std::uint64_t* a) const {
    const std::uint64_t two_p = 2 * P_;
    std::size_t t = 1;
    for (std::size_t m = n_; m > 1; m >>= 1) {
      const std::size_t h = m >> 1;
      for (std::size_t i = 0; i < h; ++i) {
        std::uint64_t* x = a + 2 * i * t;
        std::uint64_t* y = x + t;
        const std::uint64_t w = psi_inv_rev_[h + i];
        const std::uint64_t wp = psi_inv_rev_shoup_[h + i];
        for (std::size_t j = 0; j < t; ++j) {
          const std::uint64_t u = x[j];
          const std::uint64_t v = y[j];
          std::uint64_t s = u + v;
          if (s >= two_p) s -= two_p;
          x[j] = s;
          y[j] = mul_shoup_lazy(u - v + two_p, w, wp, P_);
        }
      }
      t <<= 1;
    }
    for (std::size_t j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, n_inv_shoup_, P_);
  }

 private:
  std::uint64_t P_;
  std::size_t n_;
  int logn_ = 0;
  int bits_ = 0;
  std::vector<std::uint64_t> psi_rev_, psi_rev_shoup_, psi_inv_rev_, psi_inv_rev_shoup_;
  std::uint64_t n_inv_ = 0, n_inv_shoup_ = 0;
  std::uint64_t two64_ = 0, two64_shoup_ = 0, one_shoup_ = 0;
  std::uint64_t barrett_mu_ = 0;
};

struct Modulus::Engine {
  std::vector<NttTable> tables;
  // True when the primes multiply to m itself; otherwise they form an
  // auxiliary basis wide enough for the exact integer convolution.
  bool exact = false;
  int max_terms = 0;
  std::vector<std::vector<std::uint64_t>> pj_mod_pi, pj_mod_pi_shoup;
  std::vector<std::uint64_t> inv_prefix, inv_prefix_shoup;
  // exact: prefix[i] = P_0 ... P_{i-1}.
  std::vector<u128> prefix;
  // auxiliary: limb_const[i][l] = (P_0 ... P_{i-1}) * 2^(21 l) mod m.
  std::vector<std::array<u128, kLimbs>> limb_const;
  u128 product_mod_m = 0;
  std::uint64_t top_half = 0;

  std::size_t count() const { return tables.size(); }

  void init_garner(u128 m) {
    const std::size_t k = count();
    pj_mod_pi.assign(k, {});
    pj_mod_pi_shoup.assign(k, {});
    inv_prefix.assign(k, 0);
    inv_prefix_shoup.assign(k, 0);
    prefix.assign(k, 1);
    limb_const.assign(k, {});
    u128 prefix_mod_m = 1 % m;
    for (std::size_t i = 0; i < k; ++i) {
      const std::uint64_t Pi = tables[i].prime();
      u128 prefix_mod_pi = 1;
      for (std::size_t j = 0; j < i; ++j) {
        const std::uint64_t Pj = tables[j].prime();
        pj_mod_pi[i].push_back(Pj % Pi);
        pj_mod_pi_shoup[i].push_back(shoup_factor(Pj % Pi, Pi));
        prefix_mod_pi = prefix_mod_pi * (Pj % Pi) % Pi;
      }
      inv_prefix[i] = static_cast<std::uint64_t>(inv_mod(prefix_mod_pi, Pi));
      inv_prefix_shoup[i] = shoup_factor(inv_prefix[i], Pi);
      if (exact) {
        if (i > 0) prefix[i] = prefix[i - 1] * tables[i - 1].prime();
      } else {
        for (int l = 0; l < kLimbs; ++l) {
          limb_const[i][l] = mul_mod(prefix_mod_m, (u128{1} << (kLimbBits * l)) % m, m);
        }
        prefix_mod_m = mul_mod(prefix_mod_m, Pi % m, m);
      }
    }
    product_mod_m = prefix_mod_m;
    top_half = tables.back().prime() / 2;
  }

  // Residues r[i * stride] -> centered representative mod m.
  i128 reconstruct(const std::uint64_t* r, std::size_t stride, u128 m) const {
    const std::size_t k = count();
    std::array<std::uint64_t, 8> v{};
    v[0] = r[0];
    for (std::size_t i = 1; i < k; ++i) {
      const std::uint64_t Pi = tables[i].prime();
      const NttTable& tab = tables[i];
      std::uint64_t t = tab.reduce_word(v[i - 1]);
      for (std::size_t jj = i - 1; jj-- > 0;) {
        t = mul_shoup(t, pj_mod_pi[i][jj], pj_mod_pi_shoup[i][jj], Pi);
        t = add_mod(t, tab.reduce_word(v[jj]), Pi);
      }
      v[i] = mul_shoup(sub_mod(r[i * stride], t, Pi), inv_prefix[i], inv_prefix_shoup[i], Pi);
    }
    if (exact) {
      u128 x = v[0];
      for (std::size_t i = 1; i < k; ++i) x += prefix[i] * v[i];
      return from_residue(x, m);
    }
    u128 acc = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (int l = 0; l < kLimbs; ++l) {
        acc += static_cast<u128>((v[i] >> (kLimbBits * l)) & kLimbMask) * limb_const[i][l];
      }
    }
    acc %= m;
    if (v[k - 1] > top_half) acc = acc >= product_mod_m ? acc - product_mod_m : acc + m - product_mod_m;
    return from_residue(acc, m);
  }
};

namespace {

u128 abs_diff(u128 a, u128 b) { return a > b ? a - b : b - a; }

// Brent's variant of Pollard rho. Returns a nontrivial factor or 0.
u128 pollard_rho(u128 n, u128 c, std::uint64_t budget) {
  auto f = [&](u128 x) {
    const u128 y = mul_mod(x, x, n) + c;
    return y >= n ? y - n : y;
  };
  u128 y = 2, x = 2, ys = 2, g = 1, prod = 1;
  std::uint64_t r = 1, steps = 0;
  constexpr std::uint64_t kBatch = 128;
  while (g == 1) {
    x = y;
    for (std::uint64_t i = 0; i < r; ++i) y = f(y);
    for (std::uint64_t k = 0; k < r && g == 1; k += kBatch) {
      ys = y;
      for (std::uint64_t i = 0; i < std::min(kBatch, r - k); ++i) {
        y = f(y);
        prod = mul_mod(prod, abs_diff(x, y), n);
      }
      g = gcd(prod, n);
      steps += kBatch;
    }
    r *= 2;
    if (steps > budget) return 0;
  }
  if (g == n) {
    do {
      ys = f(ys);
      g = gcd(abs_diff(x, ys), n);
    } while (g == 1);
  }
  return g == n ? 0 : g;
}

// Prime factorization with bounded effort; returns false if it gave up.
bool factorize(u128 n, std::vector<u128>& out) {
  constexpr std::uint64_t kRhoBudget = std::uint64_t{1} << 20;
  for (u128 d = 2; d < 1000 && d * d <= n; ++d) {
    while (n % d == 0) {
      out.push_back(d);
      n /= d;
    }
  }
  if (n == 1) return true;
  if (is_probable_prime(n)) {
    out.push_back(n);
    return true;
  }
  for (u128 c = 1; c < 6; ++c) {
    const u128 d = pollard_rho(n, c, kRhoBudget);
    if (d != 0) return factorize(d, out) && factorize(n / d, out);
  }
  return false;
}

// Distinct word-sized NTT primes whose product is m, if such a split exists.
std::optional<std::vector<std::uint64_t>> rns_basis(u128 m, std::size_t p) {
  std::vector<u128> f;
  if (!factorize(m, f)) return std::nullopt;
  std::sort(f.begin(), f.end());
  if (std::adjacent_find(f.begin(), f.end()) != f.end()) return std::nullopt;
  std::vector<std::uint64_t> basis;
  for (u128 P : f) {
    if (bit_length(P) > kAuxPrimeBits || P % (2 * static_cast<u128>(p)) != 1) return std::nullopt;
    basis.push_back(static_cast<std::uint64_t>(P));
  }
  return basis;
}

}  // namespace

Modulus::Modulus(u128 m, std::size_t p) : m_(m), p_(p) {}
Modulus::~Modulus() = default;

std::size_t Modulus::prime_count() const noexcept { return engine_ ? engine_->count() : 0; }

int Modulus::accumulation_limit() const noexcept {
  return engine_ ? engine_->max_terms : std::numeric_limits<int>::max();
}

std::shared_ptr<const Modulus> Modulus::create(u128 m, std::size_t p, MulStrategy strategy) {
  require(m >= 2, ErrorCode::kInvalidArgument, "modulus must be at least 2");
  require(bit_length(m) <= kMaxModulusBits, ErrorCode::kInvalidArgument,
          "modulus exceeds " + std::to_string(kMaxModulusBits) + " bits");
  require(p >= 1 && std::has_single_bit(p), ErrorCode::kInvalidArgument,
          "ring degree must be a power of two");

  std::shared_ptr<Modulus> mod(new Modulus(m, p));
  if (m % (2 * static_cast<u128>(p)) == 1 && is_probable_prime(m)) {
    mod->root_ = find_primitive_root(m, p);
  }
  const bool direct_ok = mod->root_.has_value() && bit_length(m) <= kAuxPrimeBits;
  if (direct_ok) {
    mod->eval_ = std::make_unique<NttTable>(static_cast<std::uint64_t>(m), p,
                                            static_cast<std::uint64_t>(*mod->root_));
  }

  std::optional<std::vector<std::uint64_t>> rns;
  if (strategy == MulStrategy::kAuto || strategy == MulStrategy::kRnsNtt) {
    if (direct_ok) {
      rns = std::vector<std::uint64_t>{static_cast<std::uint64_t>(m)};
    } else if (!mod->root_) {
      rns = rns_basis(m, p);
    }
  }
  if (strategy == MulStrategy::kAuto) {
    strategy = direct_ok ? MulStrategy::kDirectNtt : rns ? MulStrategy::kRnsNtt : MulStrategy::kCrtNtt;
  }
  if (strategy == MulStrategy::kDirectNtt && !direct_ok) {
    fail(ErrorCode::kNoRoot, "direct NTT needs a prime modulus below 2^62 with a 2p-th root");
  }
  if (strategy == MulStrategy::kRnsNtt && !rns) {
    fail(ErrorCode::kNoRoot, "modulus is not a product of distinct NTT-friendly word primes");
  }
  mod->strategy_ = strategy;

  auto engine = std::make_unique<Engine>();
  switch (strategy) {
    case MulStrategy::kDirectNtt:
      rns = std::vector<std::uint64_t>{static_cast<std::uint64_t>(m)};
      [[fallthrough]];
    case MulStrategy::kRnsNtt: {
      engine->exact = true;
      engine->max_terms = std::numeric_limits<int>::max();
      for (std::uint64_t P : *rns) {
        const std::uint64_t psi = P == m ? static_cast<std::uint64_t>(*mod->root_)
                                         : static_cast<std::uint64_t>(find_primitive_root(P, p));
        engine->tables.emplace_back(P, p, psi);
      }
      break;
    }
    case MulStrategy::kCrtNtt: {
      engine->max_terms = kCrtAccumulation;
      const double needed = 2.0 * (bit_length(m) - 1) + std::log2(static_cast<double>(p)) +
                            std::log2(static_cast<double>(kCrtAccumulation)) + 1.0 + 4.0;
      const u128 step = 2 * static_cast<u128>(p);
      u128 cand = ((u128{1} << kAuxPrimeBits) - 1) / step * step + 1;
      if (cand >= (u128{1} << kAuxPrimeBits)) cand -= step;
      double have = 0.0;
      while (have < needed) {
        while (!is_probable_prime(cand)) cand -= step;
        const auto P = static_cast<std::uint64_t>(cand);
        engine->tables.emplace_back(P, p, static_cast<std::uint64_t>(find_primitive_root(P, p)));
        have += std::log2(static_cast<double>(P));
        cand -= step;
      }
      require(engine->count() <= 8, ErrorCode::kInternal, "too many CRT primes");
      break;
    }
    default:
      engine.reset();
      break;
  }
  if (engine) {
    engine->init_garner(m);
    mod->engine_ = std::move(engine);
  }
  return mod;
}

Spectrum Modulus::zero_spectrum() const {
  Spectrum s;
  s.words.assign(engine_ ? p_ * engine_->count() : 2 * p_, 0);
  return s;
}

Spectrum Modulus::forward(const RingPoly& a) const {
  require(a.modulus().same_ring(*this), ErrorCode::kModulusMismatch, "spectrum of foreign polynomial");
  Spectrum s;
  const auto c = a.coeffs();
  if (engine_) {
    s.words.resize(p_ * engine_->count());
    for (std::size_t t = 0; t < engine_->count(); ++t) {
      const NttTable& tab = engine_->tables[t];
      std::uint64_t* w = s.words.data() + t * p_;
      for (std::size_t i = 0; i < p_; ++i) w[i] = tab.reduce_signed(c[i]);
      tab.forward(w);
    }
    return s;
  }
  s.words.resize(2 * p_);
  for (std::size_t i = 0; i < p_; ++i) {
    const u128 r = to_residue(c[i], m_);
    s.words[2 * i] = static_cast<std::uint64_t>(r);
    s.words[2 * i + 1] = static_cast<std::uint64_t>(r >> 64);
  }
  return s;
}

Spectrum Modulus::negate(const Spectrum& a) const {
  Spectrum s = a;
  if (engine_) {
    for (std::size_t t = 0; t < engine_->count(); ++t) {
      const std::uint64_t P = engine_->tables[t].prime();
      std::uint64_t* w = s.words.data() + t * p_;
      for (std::size_t i = 0; i < p_; ++i) w[i] = w[i] == 0 ? 0 : P - w[i];
    }
    return s;
  }
  for (std::size_t i = 0; i < p_; ++i) {
    const u128 r = static_cast<u128>(s.words[2 * i]) | (static_cast<u128>(s.words[2 * i + 1]) << 64);
    const u128 n = r == 0 ? 0 : m_ - r;
    s.words[2 * i] = static_cast<std::uint64_t>(n);
    s.words[2 * i + 1] = static_cast<std::uint64_t>(n >> 64);
  }
  return s;
}

void Modulus::multiply_accumulate(Spectrum& acc, const Spectrum& a, const Spectrum& b) const {
  require(acc.terms < accumulation_limit(), ErrorCode::kInternal, "spectrum accumulation limit reached");
  require(a.words.size() == acc.words.size() && b.words.size() == acc.words.size(),
          ErrorCode::kLengthMismatch, "spectrum size mismatch");
  ++acc.terms;
  if (engine_) {
    for (std::size_t t = 0; t < engine_->count(); ++t) {
      const NttTable& tab = engine_->tables[t];
      const std::size_t off = t * p_;
      for (std::size_t i = off; i < off + p_; ++i) {
        const std::uint64_t prod = tab.reduce_product(static_cast<u128>(a.words[i]) * b.words[i]);
        acc.words[i] = add_mod(acc.words[i], prod, tab.prime());
      }
    }
    return;
  }
  auto load = [](const Spectrum& s, std::size_t i) {
    return static_cast<u128>(s.words[2 * i]) | (static_cast<u128>(s.words[2 * i + 1]) << 64);
  };
  std::vector<u128> out(p_);
  for (std::size_t i = 0; i < p_; ++i) out[i] = load(acc, i);
  for (std::size_t i = 0; i < p_; ++i) {
    const u128 ai = load(a, i);
    if (ai == 0) continue;
    for (std::size_t j = 0; j < p_; ++j) {
      const u128 t = mul_mod(ai, load(b, j), m_);
      const std::size_t k = i + j;
      if (k < p_) {
        out[k] = out[k] + t >= m_ ? out[k] + t - m_ : out[k] + t;
      } else {
        out[k - p_] = out[k - p_] >= t ? out[k - p_] - t : out[k - p_] + m_ - t;
      }
    }
  }
  for (std::size_t i = 0; i < p_; ++i) {
    acc.words[2 * i] = static_cast<std::uint64_t>(out[i]);
    acc.words[2 * i + 1] = static_cast<std::uint64_t>(out[i] >> 64);
  }
}

RingPoly Modulus::backward(const Spectrum& s, const std::shared_ptr<const Modulus>& self) const {
  require(self.get() == this, ErrorCode::kInvalidArgument, "backward needs its own modulus handle");
  std::vector<i128> out(p_);
  if (engine_) {
    std::vector<std::uint64_t> w = s.words;
    for (std::size_t t = 0; t < engine_->count(); ++t) engine_->tables[t].inverse(w.data() + t * p_);
    if (engine_->exact && engine_->count() == 1) {
      for (std::size_t i = 0; i < p_; ++i) out[i] = from_residue(w[i], m_);
    } else {
      for (std::size_t i = 0; i < p_; ++i) out[i] = engine_->reconstruct(w.data() + i, p_, m_);
    }
  } else {
    for (std::size_t i = 0; i < p_; ++i) {
      const u128 r = static_cast<u128>(s.words[2 * i]) | (static_cast<u128>(s.words[2 * i + 1]) << 64);
      out[i] = from_residue(r, m_);
    }
  }
  return RingPoly::from_centered(self, std::move(out));
}

std::vector<i128> Modulus::evaluate(std::span<const i128> coeffs) const {
  require(root_.has_value(), ErrorCode::kNoRoot, "modulus " + to_string(m_) + " has no 2p-th root");
  require(coeffs.size() == p_, ErrorCode::kLengthMismatch, "evaluate: wrong length");
  std::vector<i128> out(p_);
  if (eval_) {
    std::vector<std::uint64_t> w(p_);
    for (std::size_t i = 0; i < p_; ++i) w[i] = static_cast<std::uint64_t>(to_residue(coeffs[i], m_));
    eval_->forward(w.data());
    const int logn = eval_->log_size();
    for (std::size_t i = 0; i < p_; ++i) out[i] = from_residue(w[bit_reverse(i, logn)], m_);
    return out;
  }
  const u128 z2 = mul_mod(*root_, *root_, m_);
  u128 point = *root_;
  for (std::size_t i = 0; i < p_; ++i) {
    u128 acc = 0;
    for (std::size_t j = p_; j-- > 0;) {
      acc = mul_mod(acc, point, m_);
      const u128 c = to_residue(coeffs[j], m_);
      acc = acc + c >= m_ ? acc + c - m_ : acc + c;
    }
    out[i] = from_residue(acc, m_);
    point = mul_mod(point, z2, m_);
  }
  return out;
}

std::vector<i128> Modulus::interpolate(std::span<const i128> values) const {
  require(root_.has_value(), ErrorCode::kNoRoot, "modulus " + to_string(m_) + " has no 2p-th root");
  require(values.size() == p_, ErrorCode::kLengthMismatch, "interpolate: wrong length");
  std::vector<i128> out(p_);
  if (eval_) {
    std::vector<std::uint64_t> w(p_);
    const int logn = eval_->log_size();
    for (std::size_t i = 0; i < p_; ++i) {
      w[bit_reverse(i, logn)] = static_cast<std::uint64_t>(to_residue(centered_mod(values[i], m_), m_));
    }
    eval_->inverse(w.data());
    for (std::size_t i = 0; i < p_; ++i) out[i] = from_residue(w[i], m_);
    return out;
  }
  // a_j = p^{-1} sum_i v_i zeta_i^{-j}
  const u128 p_inv = inv_mod(p_ % m_, m_);
  const u128 zinv = inv_mod(*root_, m_);
  const u128 zinv2 = mul_mod(zinv, zinv, m_);
  std::vector<u128> acc(p_, 0);
  u128 point_inv = zinv;
  for (std::size_t i = 0; i < p_; ++i) {
    const u128 v = to_residue(centered_mod(values[i], m_), m_);
    u128 pw = v;
    for (std::size_t j = 0; j < p_; ++j) {
      acc[j] = acc[j] + pw >= m_ ? acc[j] + pw - m_ : acc[j] + pw;
      pw = mul_mod(pw, point_inv, m_);
    }
    point_inv = mul_mod(point_inv, zinv2, m_);
  }
  for (std::size_t j = 0; j < p_; ++j) out[j] = from_residue(mul_mod(acc[j], p_inv, m_), m_);
  return out;
}

RingPoly::RingPoly(ModulusPtr modulus) : modulus_(std::move(modulus)) {
  require(modulus_ != nullptr, ErrorCode::kInvalidArgument, "null modulus");
  coeffs_.assign(modulus_->degree(), 0);
}

RingPoly RingPoly::from_coeffs(ModulusPtr modulus, std::vector<i128> coeffs) {
  require(modulus != nullptr, ErrorCode::kInvalidArgument, "null modulus");
  require(coeffs.size() == modulus->degree(), ErrorCode::kLengthMismatch,
          "expected " + std::to_string(modulus->degree()) + " coefficients, got " +
              std::to_string(coeffs.size()));
  for (auto& c : coeffs) c = centered_mod(c, modulus->value());
  return RingPoly(std::move(modulus), std::move(coeffs));
}

RingPoly RingPoly::constant(ModulusPtr modulus, i128 c) {
  RingPoly r(std::move(modulus));
  r.coeffs_[0] = centered_mod(c, r.modulus_->value());
  return r;
}

RingPoly RingPoly::from_centered(ModulusPtr modulus, std::vector<i128> coeffs) {
  return RingPoly(std::move(modulus), std::move(coeffs));
}

bool RingPoly::is_zero() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](i128 c) { return c == 0; });
}

namespace {

void check_same(const RingPoly& a, const RingPoly& b) {
  require(a.modulus().same_ring(b.modulus()), ErrorCode::kModulusMismatch,
          "operands live in different rings");
}

}  // namespace

RingPoly poly_add(const RingPoly& a, const RingPoly& b) {
  check_same(a, b);
  const u128 m = a.modulus().value();
  std::vector<i128> out(a.degree());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = center_small(a[i] + b[i], m);
  return RingPoly::from_centered(a.modulus_ptr(), std::move(out));
}

RingPoly poly_sub(const RingPoly& a, const RingPoly& b) {
  check_same(a, b);
  const u128 m = a.modulus().value();
  std::vector<i128> out(a.degree());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = center_small(a[i] - b[i], m);
  return RingPoly::from_centered(a.modulus_ptr(), std::move(out));
}

RingPoly poly_neg(const RingPoly& a) {
  const u128 m = a.modulus().value();
  std::vector<i128> out(a.degree());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = center_small(-a[i], m);
  return RingPoly::from_centered(a.modulus_ptr(), std::move(out));
}

RingPoly poly_scale(i128 k, const RingPoly& a) {
  const u128 m = a.modulus().value();
  const u128 kr = to_residue(centered_mod(k, m), m);
  std::vector<i128> out(a.degree());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = from_residue(mul_mod(kr, to_residue(a[i], m), m), m);
  }
  return RingPoly::from_centered(a.modulus_ptr(), std::move(out));
}

RingPoly poly_mul(const RingPoly& a, const RingPoly& b) {
  check_same(a, b);
  const Modulus& mod = a.modulus();
  Spectrum acc = mod.zero_spectrum();
  mod.multiply_accumulate(acc, mod.forward(a), mod.forward(b));
  return mod.backward(acc, a.modulus_ptr());
}

RingPoly poly_mul_schoolbook(const RingPoly& a, const RingPoly& b) {
  check_same(a, b);
  const u128 m = a.modulus().value();
  const std::size_t p = a.degree();
  std::vector<u128> out(p, 0);
  for (std::size_t i = 0; i < p; ++i) {
    if (a[i] == 0) continue;
    const u128 ai = to_residue(a[i], m);
    for (std::size_t j = 0; j < p; ++j) {
      const u128 t = mul_mod(ai, to_residue(b[j], m), m);
      const std::size_t k = i + j;
      if (k < p) {
        out[k] = out[k] + t >= m ? out[k] + t - m : out[k] + t;
      } else {
        out[k - p] = out[k - p] >= t ? out[k - p] - t : out[k - p] + m - t;
      }
    }
  }
  std::vector<i128> res(p);
  for (std::size_t i = 0; i < p; ++i) res[i] = from_residue(out[i], m);
  return RingPoly::from_centered(a.modulus_ptr(), std::move(res));
}

RingPoly change_modulus(const RingPoly& a, ModulusPtr target) {
  require(target != nullptr && target->degree() == a.degree(), ErrorCode::kLengthMismatch,
          "target ring has a different degree");
  std::vector<i128> c(a.coeffs().begin(), a.coeffs().end());
  return RingPoly::from_coeffs(std::move(target), std::move(c));
}

std::vector<i128> ntt_forward(const RingPoly& a) { return a.modulus().evaluate(a.coeffs()); }

RingPoly ntt_inverse(const ModulusPtr& modulus, std::span<const i128> values) {
  return RingPoly::from_centered(modulus, modulus->interpolate(values));
}

}  // namespace encctl::ring
