#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "encctl/enc_general.hpp"
#include "encctl/error.hpp"
#include "test_support.hpp"

using namespace encctl;
using namespace encctl::general;

namespace {

std::int64_t rnd(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

// Plain integer model of the quantized finite-memory controller.
struct IntegerModel {
  std::vector<std::vector<std::int64_t>> Hq;  // h x n_bar
  std::vector<std::int64_t> Z;
  std::size_t n, h, l;

  IntegerModel(const control::TransformedController& t, double L, double s) : n(t.n), h(t.h), l(t.l) {
    Hq.assign(h, std::vector<std::int64_t>(t.n_bar));
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < t.n_bar; ++c) Hq[r][c] = rnd(t.Hcal(r, c) / s);
    for (std::size_t c = 0; c < t.n_bar; ++c) Z.push_back(rnd(t.z0(c) / L));
  }
  std::vector<i128> output() const {
    std::vector<i128> u(h, 0);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < Z.size(); ++c) u[r] += static_cast<i128>(Hq[r][c]) * Z[c];
    return u;
  }
  void update(const std::vector<std::int64_t>& yq, const std::vector<std::int64_t>& uq) {
    std::vector<std::int64_t> next;
    next.insert(next.end(), yq.begin(), yq.end());
    next.insert(next.end(), Z.begin(), Z.begin() + (n - 1) * l);
    next.insert(next.end(), uq.begin(), uq.end());
    next.insert(next.end(), Z.begin() + n * l, Z.begin() + n * l + (n - 1) * h);
    Z = next;
  }
};

struct Fixture {
  bgv::ContextPtr ctx;
  bgv::SecretKey key;
  quant::QuantParams qp;
  control::ControllerRealization c;
  control::TransformedController t;
};

Fixture make_fixture(std::size_t r_bar = 35) {
  bgv::BgvParams prm;
  prm.N = encctl::testing::kF16N;
  prm.q = encctl::testing::f16_q();
  prm.p = 8;
  prm.r_bar = r_bar;
  auto ctx = bgv::Context::create(prm);
  auto key = bgv::keygen(ctx, 3);
  std::mt19937_64 rng(77);
  auto c = encctl::testing::random_controller(rng, 2, 2, 3);
  auto t = control::transform(c);
  return {ctx, std::move(key), {1e-3, 1e-2, prm.N}, c, t};
}

std::vector<i128> centered(const std::vector<i128>& v, u128 N) {
  std::vector<i128> out;
  for (auto x : v) out.push_back(ring::centered_mod(x, N));
  return out;
}

}  // namespace

TEST(GeneralController, MatchesIntegerModel) {
  auto f = make_fixture();
  bgv::Prng rng(1);
  auto ctl = GeneralEncController::setup(f.key, f.t, f.qp, rng);
  IntegerModel model(f.t, f.qp.L, f.qp.s);
  std::mt19937_64 yrng(2);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int k = 0; k < 8; ++k) {
    bgv::OpCounters cnt;
    const auto ubar = ctl.output(&cnt);
    ASSERT_EQ(ubar.size(), 2u);
    const auto expect = model.output();
    const auto act = actuator_step(ubar, f.key, f.qp, rng, &cnt);
    EXPECT_EQ(act.u_int, centered(expect, f.qp.N)) << "step " << k;
    // Counters for the controller and actuator: h prod1 calls over n_bar terms, h decryptions, h encryptions.
    EXPECT_EQ(cnt.mult, 2u * f.t.n_bar);
    EXPECT_EQ(cnt.add, 2u * (f.t.n_bar - 1));
    EXPECT_EQ(cnt.dec, 2u);
    EXPECT_EQ(cnt.enc, 2u);
    Eigen::VectorXd y(3);
    for (auto& v : y) v = d(yrng);
    std::vector<std::int64_t> yq, uq;
    for (auto v : y) yq.push_back(rnd(v / f.qp.L));
    for (std::size_t r = 0; r < 2; ++r) {
      const double u = static_cast<double>(expect[r]) * (f.qp.L * f.qp.s);
      EXPECT_DOUBLE_EQ(act.u(r), u);
      uq.push_back(rnd(u / f.qp.L));
      EXPECT_EQ(act.u_requant[r], i128(uq.back()));
    }
    ctl.update(sensor_encrypt(y, f.qp, f.key, rng), act.u_enc);
    model.update(yq, uq);
  }
  EXPECT_EQ(ctl.step(), 8u);
}

TEST(GeneralController, StructuralUpdateAgreesWithRotation) {
  auto f = make_fixture();
  bgv::Prng rng(1);
  auto a = GeneralEncController::setup(f.key, f.t, f.qp, rng);
  auto b = a;
  Eigen::VectorXd y(3), u(2);
  y << 0.1, -0.2, 0.3;
  u << 0.05, -0.07;
  const auto y_enc = sensor_encrypt(y, f.qp, f.key, rng);
  const auto u_enc = sensor_encrypt(u, f.qp, f.key, rng);
  a.update(y_enc, u_enc);
  b.update_structural(y_enc, u_enc);
  ASSERT_EQ(a.state().size(), b.state().size());
  for (std::size_t i = 0; i < a.state().size(); ++i)
    EXPECT_EQ(bgv::decrypt(f.key, a.state()[i]), bgv::decrypt(f.key, b.state()[i])) << i;
}

TEST(GeneralController, StorageCounts) {
  auto f = make_fixture();
  bgv::Prng rng(1);
  const auto ctl = GeneralEncController::setup(f.key, f.t, f.qp, rng);
  const auto s = ctl.storage();
  EXPECT_EQ(s.z, 2 * f.t.n_bar);          // n_bar ciphertexts of 2 polynomials
  EXPECT_EQ(s.H, 2 * 2 * f.t.n_bar);      // h x n_bar ciphertexts
}

TEST(GeneralController, SetupErrors) {
  {
    auto f = make_fixture(4);
    bgv::Prng rng(1);
    try {
      GeneralEncController::setup(f.key, f.t, f.qp, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kTooManyTerms);
    }
  }
  {
    auto f = make_fixture();
    bgv::Prng rng(1);
    auto qp = f.qp;
    qp.s = 1e-9;  // gains overflow Z_N
    try {
      GeneralEncController::setup(f.key, f.t, qp, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kRangeExceeded);
    }
  }
}

TEST(GeneralController, ActuatorRejectsWrongScale) {
  auto f = make_fixture();
  bgv::Prng rng(1);
  const std::vector<bgv::Ciphertext> fresh{bgv::encrypt_scalar(f.key, 3, rng, bgv::kSignalScale)};
  EXPECT_THROW(actuator_step(fresh, f.key, f.qp, rng), Error);
}
