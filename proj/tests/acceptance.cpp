// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "encctl/bgv.hpp"
#include "encctl/control.hpp"
#include "encctl/design.hpp"
#include "encctl/error.hpp"
#include "encctl/packing.hpp"
#include "encctl/sim.hpp"
#include "test_support.hpp"

using namespace encctl;
using encctl::testing::random_centered;
using encctl::testing::ref_mod;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned thresholds.
constexpr double kGoldenBudgetSeconds = 1e-3;
constexpr std::size_t kBgvCases = 1000;
constexpr double kBgvBudgetSeconds = 60.0;
constexpr std::size_t kProd1MaxTerms = 35;
constexpr std::size_t kProd2MaxTerms = 10;
constexpr std::size_t kRandomControllers = 100;
constexpr std::size_t kRealizationSteps = 50;
constexpr double kRealizationRelTol = 1e-6;
constexpr double kInitialStateTol = 1e-8;
constexpr std::size_t kEquivalenceSteps = 100;
constexpr double kFig4FineCeiling = 1e-2;
constexpr double kFig4CoarseLow = 1e-2, kFig4CoarseHigh = 1e-1;
constexpr std::size_t kFig4Steps = 100;  // 5 s at 0.05 s
constexpr std::size_t kFig5Step = 200;
constexpr double kFig5Bound = 0.05;
constexpr double kSamplingPeriod = 0.05;
constexpr double kReportedStepSeconds = 0.0104;

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<i128> to_vec(const ring::RingPoly& a) { return {a.coeffs().begin(), a.coeffs().end()}; }

// ---------------------------------------------------------------------------

void criterion_golden() {
  const std::vector<i128> u{1, 3, 5, 7}, v{2, -4, -6, 8};
  bool ok = true;
  double best = 1e9;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = Clock::now();
    const packing::PackingContext ctx(17, 4);
    const auto pu = ctx.pack(u), pv = ctx.pack(v);
    const auto sum = ctx.unpack(ring::poly_add(pu, pv));
    const auto prod = ring::poly_mul(pu, pv);
    const auto prod_slots = ctx.unpack(prod);
    best = std::min(best, seconds_since(t0));
    ok = ok && ctx.zeta() == 2;
    ok = ok && to_vec(pu) == std::vector<i128>{4, -7, 4, -7};
    ok = ok && to_vec(pv) == std::vector<i128>{0, 7, 8, 3};
    ok = ok && sum == std::vector<i128>{3, -1, -1, -2};
    ok = ok && to_vec(prod) == std::vector<i128>{4, 4, 4, 1};
    ok = ok && prod_slots == std::vector<i128>{2, 5, 4, 5};
  }
  report(1, "packing golden vectors", ok && best < kGoldenBudgetSeconds,
         std::string(ok ? "exact match" : "MISMATCH") + fmt(", best of 5 runs %.1f us", best * 1e6));
}

// ---------------------------------------------------------------------------

struct SuiteResult {
  std::size_t cases = 0, failures = 0;
};

struct BgvSuite {
  bgv::BgvParams prm;
  bgv::ContextPtr ctx;
  bgv::SecretKey key;
  packing::PackingContext pack;
  std::uint64_t N;

  explicit BgvSuite(const bgv::BgvParams& p)
      : prm(p), ctx(bgv::Context::create(p)), key(bgv::keygen(ctx, 101)), pack(ctx->plaintext_ring()),
        N(static_cast<std::uint64_t>(p.N)) {}

  ring::RingPoly msg(const std::vector<i128>& c) const {
    return ring::RingPoly::from_coeffs(ctx->plaintext_ring(), c);
  }

  // Dec(Enc(m)) = m.
  SuiteResult correctness(std::mt19937_64& g, bgv::Prng& rng) const {
    SuiteResult r;
    for (std::size_t i = 0; i < kBgvCases; ++i, ++r.cases) {
      const auto m = random_centered(g, prm.p, N);
      if (to_vec(bgv::decrypt(key, bgv::encrypt(key, msg(m), rng))) != m) ++r.failures;
    }
    return r;
  }

  // Dec(Enc(m1) + Enc(m2)) = m1 + m2.
  SuiteResult addition(std::mt19937_64& g, bgv::Prng& rng) const {
    SuiteResult r;
    for (std::size_t i = 0; i < kBgvCases; ++i, ++r.cases) {
      const auto a = random_centered(g, prm.p, N), b = random_centered(g, prm.p, N);
      std::vector<i128> expect(prm.p);
      for (std::size_t j = 0; j < prm.p; ++j) expect[j] = ref_mod(a[j] + b[j], N);
      const auto c = bgv::hom_add(bgv::encrypt(key, msg(a), rng), bgv::encrypt(key, msg(b), rng));
      if (to_vec(bgv::decrypt(key, c)) != expect) ++r.failures;
    }
    return r;
  }

  // Unpack(Dec(Mult(Enc(Pack a), Enc(Pack b)))) = a o b.
  SuiteResult hadamard(std::mt19937_64& g, bgv::Prng& rng) const {
    SuiteResult r;
    for (std::size_t i = 0; i < kBgvCases; ++i, ++r.cases) {
      const auto a = random_centered(g, prm.p, N), b = random_centered(g, prm.p, N);
      std::vector<i128> expect(prm.p);
      for (std::size_t j = 0; j < prm.p; ++j) expect[j] = ref_mod(a[j] * b[j], N);
      const auto c = bgv::hom_mul(bgv::encrypt(key, pack.pack(a), rng), bgv::encrypt(key, pack.pack(b), rng));
      if (pack.unpack(bgv::decrypt(key, c)) != expect) ++r.failures;
    }
    return r;
  }

  // Case i draws r = 1 + (i mod max_terms) pairs from pools of fresh
  // encryptions; every case checks the full decrypted polynomial.
  SuiteResult prod1(std::mt19937_64& g, bgv::Prng& rng) const {
    const std::size_t pool = 2 * kProd1MaxTerms;
    std::vector<bgv::Ciphertext> ca, cm;
    std::vector<i128> a, m;
    for (std::size_t i = 0; i < pool; ++i) {
      a.push_back(random_centered(g, 1, N)[0]);
      m.push_back(random_centered(g, 1, N)[0]);
      ca.push_back(bgv::encrypt_scalar(key, a.back(), rng));
      cm.push_back(bgv::encrypt_scalar(key, m.back(), rng));
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
    SuiteResult r;
    for (std::size_t i = 0; i < kBgvCases; ++i, ++r.cases) {
      const std::size_t terms = 1 + i % kProd1MaxTerms;
      std::vector<bgv::Ciphertext> xa, xm;
      i128 dot = 0;
      for (std::size_t t = 0; t < terms; ++t) {
        const std::size_t ia = pick(g), im = pick(g);
        xa.push_back(ca[ia]);
        xm.push_back(cm[im]);
        dot = ref_mod(dot + a[ia] * m[im], N);
      }
      std::vector<i128> expect(prm.p, 0);
      expect[0] = dot;
      if (to_vec(bgv::decrypt(key, bgv::prod1(xa, xm))) != expect) ++r.failures;
    }
    return r;
  }

  SuiteResult prod2(std::mt19937_64& g, bgv::Prng& rng) const {
    const std::size_t pool = 2 * kProd2MaxTerms;
    std::vector<bgv::Ciphertext> ca, cm;
    std::vector<std::vector<i128>> a, m;
    for (std::size_t i = 0; i < pool; ++i) {
      a.push_back(random_centered(g, prm.p, N));
      m.push_back(random_centered(g, prm.p, N));
      ca.push_back(bgv::encrypt(key, pack.pack(a.back()), rng));
      cm.push_back(bgv::encrypt(key, pack.pack(m.back()), rng));
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
    SuiteResult r;
    for (std::size_t i = 0; i < kBgvCases; ++i, ++r.cases) {
      const std::size_t terms = 1 + i % kProd2MaxTerms;
      std::vector<bgv::Ciphertext> xa, xm;
      std::vector<i128> expect(prm.p, 0);
      for (std::size_t t = 0; t < terms; ++t) {
        const std::size_t ia = pick(g), im = pick(g);
        xa.push_back(ca[ia]);
        xm.push_back(cm[im]);
        for (std::size_t j = 0; j < prm.p; ++j) expect[j] = ref_mod(expect[j] + a[ia][j] * m[im][j], N);
      }
      if (pack.unpack(bgv::decrypt(key, bgv::prod2(xa, xm))) != expect) ++r.failures;
    }
    return r;
  }
};

void criterion_bgv() {
  bgv::BgvParams toy;
  toy.N = 17;
  toy.q = (u128(1) << 61) - 1;
  toy.p = 4;
  toy.r_bar = kProd1MaxTerms;
  bgv::BgvParams f16;
  f16.N = encctl::testing::kF16N;
  f16.q = encctl::testing::f16_q();
  f16.p = encctl::testing::kF16P;
  f16.sigma = 3.2;
  f16.r_bar = kProd1MaxTerms;

  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  for (const auto& [label, prm] : {std::pair{"toy", toy}, std::pair{"f16", f16}}) {
    const BgvSuite suite(prm);
    std::mt19937_64 g(prm.p * 7919 + 1);
    bgv::Prng rng(prm.p * 104729 + 3);
    const std::pair<const char*, SuiteResult> results[] = {
        {"dec(enc)", suite.correctness(g, rng)}, {"add", suite.addition(g, rng)},
        {"hadamard", suite.hadamard(g, rng)},    {"prod1", suite.prod1(g, rng)},
        {"prod2", suite.prod2(g, rng)},
    };
    detail += std::string(label) + " [";
    for (const auto& [name, r] : results) {
      ok = ok && r.failures == 0 && r.cases >= kBgvCases;
      detail += std::string(name) + " " + std::to_string(r.cases - r.failures) + "/" + std::to_string(r.cases) + " ";
    }
    detail.back() = ']';
    detail += ' ';
  }
  const double elapsed = seconds_since(t0);
  report(2, "BGV correctness suite", ok && elapsed < kBgvBudgetSeconds, detail + fmt("in %.1f s", elapsed));
}

// ---------------------------------------------------------------------------

void criterion_realization() {
  std::mt19937_64 g(31337);
  std::uniform_int_distribution<std::size_t> dn(1, 5), dhl(1, 3);
  std::size_t done = 0, bad = 0;
  double worst_rel = 0, worst_state = 0;
  while (done < kRandomControllers) {
    const std::size_t n = dn(g), h = dhl(g), l = dhl(g);
    const auto c = encctl::testing::random_controller(g, n, h, l);
    if (control::numerical_rank(control::controllability_matrix(c.F, c.G)) < n) continue;
    if (control::numerical_rank(control::observability_matrix(c.F, c.H)) < n) continue;
    ++done;
    try {
      const auto t = control::transform(c);
      const auto cmp = encctl::testing::compare_realizations(c, t, g, kRealizationSteps);
      worst_rel = std::max(worst_rel, cmp.max_rel_err);
      worst_state = std::max(worst_state, cmp.state_match);
      if (cmp.max_rel_err > kRealizationRelTol || cmp.state_match > kInitialStateTol) ++bad;
    } catch (const Error& e) {
      ++bad;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu/%zu controllers, worst relative output error %.2e, worst |M z0 - x0| %.2e",
                done - bad, done, worst_rel, worst_state);
  report(3, "finite-memory re-realization", bad == 0, buf);
}

// ---------------------------------------------------------------------------

struct F16Runs {
  config::RunConfig cfg;
  control::TransformedController t;
  sim::SimTrace oracle, general, packed;
};

void criterion_equivalence(const F16Runs& r) {
  bool ok = r.oracle.steps.size() == kEquivalenceSteps;
  std::size_t mismatched = 0, out_of_range = 0;
  for (const sim::SimTrace* tr : {&r.general, &r.packed}) {
    ok = ok && tr->steps.size() >= kEquivalenceSteps;
    for (std::size_t k = 0; k < kEquivalenceSteps && k < tr->steps.size(); ++k) {
      const auto& a = tr->steps[k];
      const auto& b = r.oracle.steps[k];
      if (a.u_int != b.u_int || a.u != b.u) ++mismatched;
      if (!a.range_ok) ++out_of_range;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "general and packed vs integer oracle over %zu steps: %zu mismatching steps, "
                "%zu steps outside Z_N",
                kEquivalenceSteps, mismatched, out_of_range);
  report(4, "encrypted = quantized oracle (F-16)", ok && mismatched == 0 && out_of_range == 0, buf);
}

void criterion_epsilon(const F16Runs& r) {
  const auto model = design::closed_loop(r.cfg.plant, r.cfg.controller);
  const auto cert = design::decay_certificate(model.A);
  const auto eps = design::epsilon_vector(model, cert, r.t.M, r.t.n_bar, r.t.z0);
  std::string detail = fmt("eps0 = %.4g; ", eps[0]);
  bool ok = true;
  for (double inv_L : {2e2, 2e3, 2e4}) {
    for (double inv_s : {1e3, 1e4, 1e5}) {
      const quant::QuantParams qp{1.0 / inv_L, 1.0 / inv_s, r.cfg.bgv.N};
      const auto tr = sim::run_quantized_oracle(r.cfg.plant, r.cfg.controller, r.t, qp, kEquivalenceSteps);
      const double measured = sim::error_metrics(tr).max_err;
      bool fits = true;
      for (const auto& st : tr.steps) fits = fits && st.range_ok;
      const char* range = fits ? "" : " outside Z_N";
      char buf[160];
      try {
        const double bound = design::epsilon_of(qp.L, qp.s, eps);
        ok = ok && measured <= bound;
        std::snprintf(buf, sizeof buf, "(%g,%g) %.3g<=%.3g%s%s; ", inv_L, inv_s, measured, bound,
                      measured <= bound ? "" : " VIOLATED", range);
      } catch (const Error& e) {
        ok = false;
        std::snprintf(buf, sizeof buf, "(%g,%g) %.3g, bound undefined%s; ", inv_L, inv_s, measured, range);
      }
      detail += buf;
    }
  }
  if (!ok) detail += "the bound requires 1/s > eps0 at every grid point";
  report(5, "error bound containment grid", ok, detail);
}

void criterion_fig4(const F16Runs& r) {
  // Measured on the packed encrypted loop against the nominal loop.
  auto run = [&](double inv_s) {
    auto prm = r.cfg.encrypted_params();
    prm.qp.L = 1.0 / 2000;
    prm.qp.s = 1.0 / inv_s;
    const auto tr = sim::run_encrypted(r.cfg.plant, r.cfg.controller, r.t, sim::ControllerKind::kPacked, prm,
                                       kFig4Steps);
    return sim::error_metrics(tr).max_u_err;
  };
  const double fine = run(1e4), coarse = run(1e3);
  const bool ok = fine <= kFig4FineCeiling && coarse >= kFig4CoarseLow && coarse <= kFig4CoarseHigh;
  char buf[200];
  std::snprintf(buf, sizeof buf, "1/L=2000: max|u-u'| = %.3g at 1/s=1e4 (<= %.0e), %.3g at 1/s=1e3 (in [%.0e, %.0e])",
                fine, kFig4FineCeiling, coarse, kFig4CoarseLow, kFig4CoarseHigh);
  report(6, "input error magnitudes", ok, buf);
}

void criterion_fig5(const F16Runs& r) {
  const double norm = control::inf_norm(r.packed.steps.at(kFig5Step).xp);
  report(7, "plant state regulation (packed)", norm < kFig5Bound,
         fmt("||x_p(200)||_inf = %.3g", norm) + fmt(" (< %.2g)", kFig5Bound));
}

void criterion_table1(const F16Runs& r) {
  const std::size_t n = r.t.n, h = r.t.h, l = r.t.l;
  const bgv::OpCounters g_formula{h + l, h, h * (n * h + n * l - 1), h * n * (h + l), 0};
  const bgv::OpCounters p_formula{2, 1, 2 * n - 1, 2 * n, 0};
  auto strip = [](bgv::OpCounters c) {
    c.poly_mult = 0;
    return c;
  };
  const auto g = strip(sim::per_step_counters(r.general));
  const auto p = strip(sim::per_step_counters(r.packed));
  bool ok = g == g_formula && p == p_formula;
  ok = ok && g == bgv::OpCounters{7, 2, 68, 70, 0} && p == bgv::OpCounters{2, 1, 9, 10, 0};
  const auto& gs = *r.general.storage;
  const auto& ps = *r.packed.storage;
  ok = ok && gs.u == 2 * h && gs.u_bar == 3 * h && gs.y == 2 * l && gs.z == 2 * n * (h + l) &&
       gs.H == 2 * h * n * (h + l);
  ok = ok && ps.u == 2 && ps.u_bar == 3 && ps.y == 2 && ps.z == 4 * n && ps.H == 4 * n;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "general (Enc,Dec,add,Mult) = (%llu,%llu,%llu,%llu), packed = (%llu,%llu,%llu,%llu); "
                "polynomials u/ubar/y/z/H general %zu/%zu/%zu/%zu/%zu, packed %zu/%zu/%zu/%zu/%zu",
                (unsigned long long)g.enc, (unsigned long long)g.dec, (unsigned long long)g.add,
                (unsigned long long)g.mult, (unsigned long long)p.enc, (unsigned long long)p.dec,
                (unsigned long long)p.add, (unsigned long long)p.mult, gs.u, gs.u_bar, gs.y, gs.z, gs.H, ps.u,
                ps.u_bar, ps.y, ps.z, ps.H);
  report(8, "operation and storage ledger", ok, buf);
}

void criterion_table2(const F16Runs& r) {
  const std::size_t p = r.cfg.bgv.p, h = r.t.h, l = r.t.l;
  bool ok = true;
  for (const auto& s : r.packed.steps) ok = ok && s.comm_integers == 7 * p;
  const auto c = sim::cost_report(r.t.n, h, l, p, r.cfg.bgv.q);
  ok = ok && c.relinearized_comm == 6 * p && c.elementwise_lwe_comm == (2 * h + l) * (p + 1) &&
       c.alg1_comm == 7 * p;
  char buf[200];
  std::snprintf(buf, sizeof buf, "packed sends %zu integers per step (7p = %zu); what-if 6p = %llu; baseline %llu",
                r.packed.steps.front().comm_integers, 7 * p, (unsigned long long)c.relinearized_comm,
                (unsigned long long)c.elementwise_lwe_comm);
  report(9, "communication per step", ok, buf);
}

void criterion_timing(const F16Runs& r) {
  double total = 0;
  for (const auto& s : r.packed.steps) total += static_cast<double>(s.wall_ns) * 1e-9;
  const double mean = total / static_cast<double>(r.packed.steps.size());
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean packed step %.4f s over %zu steps (period %.2f s, reported %.4f s)", mean,
                r.packed.steps.size(), kSamplingPeriod, kReportedStepSeconds);
  report(10, "per-step wall time", mean <= kSamplingPeriod, buf);
}

void guarded(int id, const char* title, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, title, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, "packing golden vectors", criterion_golden);
  guarded(2, "BGV correctness suite", criterion_bgv);
  guarded(3, "finite-memory re-realization", criterion_realization);

  F16Runs runs;
  try {
    runs.cfg = encctl::testing::f16_config();
    runs.t = control::transform(runs.cfg.controller);
    runs.oracle = sim::run_quantized_oracle(runs.cfg.plant, runs.cfg.controller, runs.t, runs.cfg.quant_params(),
                                            kEquivalenceSteps, sim::ControllerKind::kPacked);
    runs.general = sim::run_encrypted(runs.cfg.plant, runs.cfg.controller, runs.t, sim::ControllerKind::kGeneral,
                                      runs.cfg.encrypted_params(), kEquivalenceSteps);
    runs.packed = sim::run_encrypted(runs.cfg.plant, runs.cfg.controller, runs.t, sim::ControllerKind::kPacked,
                                     runs.cfg.encrypted_params(), kFig5Step + 1);
  } catch (const std::exception& e) {
    for (int id = 4; id <= 10; ++id) report(id, "F-16 loop", false, std::string("setup threw: ") + e.what());
    return 1;
  }
  guarded(4, "encrypted = quantized oracle (F-16)", [&] { criterion_equivalence(runs); });
  guarded(5, "error bound containment grid", [&] { criterion_epsilon(runs); });
  guarded(6, "input error magnitudes", [&] { criterion_fig4(runs); });
  guarded(7, "plant state regulation (packed)", [&] { criterion_fig5(runs); });
  guarded(8, "operation and storage ledger", [&] { criterion_table1(runs); });
  guarded(9, "communication per step", [&] { criterion_table2(runs); });
  guarded(10, "per-step wall time", [&] { criterion_timing(runs); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
