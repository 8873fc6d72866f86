#include "encctl/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "encctl/enc_general.hpp"
#include "encctl/enc_packed.hpp"
#include "encctl/error.hpp"
#include "encctl/packing.hpp"

namespace encctl::sim {

using control::inf_norm;

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kNominal: return "nominal";
    case ControllerKind::kOracle: return "oracle";
    case ControllerKind::kGeneral: return "general";
    case ControllerKind::kPacked: return "packed";
  }
  return "unknown";
}

ControllerKind parse_kind(const std::string& text) {
  if (text == "nominal") return ControllerKind::kNominal;
  if (text == "oracle") return ControllerKind::kOracle;
  if (text == "general") return ControllerKind::kGeneral;
  if (text == "packed") return ControllerKind::kPacked;
  fail(ErrorCode::kConfigInvalid, "unknown controller kind '" + text + "'");
}

namespace {

void check_finite(const Vec& v, std::size_t k) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || std::fabs(v(i)) > kDivergenceLimit) {
      fail(ErrorCode::kUnstable, "simulation diverged at step " + std::to_string(k));
    }
  }
}

bool fits(i128 v, u128 N) {
  const u128 mag = v < 0 ? static_cast<u128>(-v) : static_cast<u128>(v);
  return 2 * mag < N;
}

/// Plaintext integer controller: Z holds round(z / L), Hq = round(Hcal / s).
class OracleState {
 public:
  OracleState(const control::TransformedController& t, const quant::QuantParams& qp)
      : n_(t.n), h_(t.h), l_(t.l), N_(qp.N) {
    Z_ = quant::round_half_up(Vec(t.z0 / qp.L));
    const auto flat = quant::round_half_up(Mat(t.Hcal / qp.s));
    Hq_.assign(h_, std::vector<i128>(t.n_bar));
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t j = 0; j < t.n_bar; ++j) Hq_[r][j] = flat[r * t.n_bar + j];
  }

  std::vector<i128> output() const {
    std::vector<i128> u(h_, 0);
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t j = 0; j < Z_.size(); ++j) u[r] += Hq_[r][j] * Z_[j];
    return u;
  }

  /// Whether the encrypted controller of this kind decrypts without wrap.
  bool range_ok(ControllerKind kind) const {
    for (i128 z : Z_)
      if (!fits(z, N_)) return false;
    if (kind != ControllerKind::kPacked) {
      for (i128 v : output())
        if (!fits(v, N_)) return false;
      return true;
    }
    // Each slot of the packed product before the partition sum.
    const std::size_t w = std::max(h_, l_);
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t j = 0; j < w; ++j) {
        i128 slot = 0;
        if (j < l_)
          for (std::size_t i = 0; i < n_; ++i) slot += Hq_[r][i * l_ + j] * Z_[i * l_ + j];
        if (j < h_)
          for (std::size_t i = 0; i < n_; ++i) slot += Hq_[r][n_ * l_ + i * h_ + j] * Z_[n_ * l_ + i * h_ + j];
        if (!fits(slot, N_)) return false;
      }
    }
    return true;
  }

  void update(const std::vector<i128>& yq, const std::vector<i128>& uq) {
    std::vector<i128> next;
    next.reserve(Z_.size());
    const std::size_t ny = n_ * l_;
    next.insert(next.end(), yq.begin(), yq.end());
    next.insert(next.end(), Z_.begin(), Z_.begin() + static_cast<std::ptrdiff_t>(ny - l_));
    next.insert(next.end(), uq.begin(), uq.end());
    next.insert(next.end(), Z_.begin() + static_cast<std::ptrdiff_t>(ny),
                Z_.begin() + static_cast<std::ptrdiff_t>(ny + n_ * h_ - h_));
    Z_ = std::move(next);
  }

 private:
  std::size_t n_, h_, l_;
  u128 N_;
  std::vector<i128> Z_;
  std::vector<std::vector<i128>> Hq_;
};

/// Nominal loop advanced in lockstep with another run.
class NominalLoop {
 public:
  NominalLoop(const PlantModel& plant, const control::ControllerRealization& ctrl)
      : plant_(plant), ctrl_(ctrl), xp_(plant.xp0), x_(ctrl.x0) {}

  void outputs(Vec& u, Vec& y) const {
    y = plant_.C * xp_;
    u = ctrl_.H * x_;
  }
  void advance(const Vec& u, const Vec& y) {
    xp_ = plant_.A * xp_ + plant_.B * u;
    x_ = ctrl_.F * x_ + ctrl_.G * y;
  }
  const Vec& xp() const { return xp_; }

 private:
  const PlantModel& plant_;
  const control::ControllerRealization& ctrl_;
  Vec xp_, x_;
};

double step_error(const StepRecord& r) {
  return std::max(inf_norm(Vec(r.u - r.u_ref)), inf_norm(Vec(r.y - r.y_ref)));
}

std::vector<i128> raw_quantize(const Vec& v, double L) { return quant::round_half_up(Vec(v / L)); }

[[noreturn]] void rethrow_at(const Error& e, std::size_t k) {
  throw Error(e.code(), "step " + std::to_string(k) + ": " + e.what());
}

}  // namespace

SimTrace run_nominal(const PlantModel& plant, const control::ControllerRealization& ctrl, std::size_t T) {
  design::validate(plant, ctrl);
  SimTrace trace;
  trace.kind = ControllerKind::kNominal;
  trace.h = plant.h();
  trace.l = plant.l();
  NominalLoop loop(plant, ctrl);
  for (std::size_t k = 0; k < T; ++k) {
    StepRecord r;
    r.k = k;
    loop.outputs(r.u, r.y);
    r.u_ref = r.u;
    r.y_ref = r.y;
    r.xp = loop.xp();
    loop.advance(r.u, r.y);
    check_finite(loop.xp(), k);
    trace.steps.push_back(std::move(r));
  }
  return trace;
}

SimTrace run_quantized_oracle(const PlantModel& plant, const control::ControllerRealization& ctrl,
                              const control::TransformedController& t, const quant::QuantParams& qp,
                              std::size_t T, ControllerKind range_kind) {
  design::validate(plant, ctrl);
  quant::validate(qp);
  SimTrace trace;
  trace.kind = ControllerKind::kOracle;
  trace.h = plant.h();
  trace.l = plant.l();
  NominalLoop ref(plant, ctrl);
  OracleState oracle(t, qp);
  Vec xp = plant.xp0;
  for (std::size_t k = 0; k < T; ++k) {
    StepRecord r;
    r.k = k;
    ref.outputs(r.u_ref, r.y_ref);
    r.xp = xp;
    r.y = plant.C * xp;
    r.range_ok = oracle.range_ok(range_kind);
    r.u_int = oracle.output();
    r.u = quant::rescale(r.u_int, qp.L, qp.s);
    const auto yq = raw_quantize(r.y, qp.L);
    const auto uq = raw_quantize(r.u, qp.L);
    for (i128 v : yq) r.range_ok = r.range_ok && fits(v, qp.N);
    for (i128 v : uq) r.range_ok = r.range_ok && fits(v, qp.N);
    oracle.update(yq, uq);
    r.err_inf = step_error(r);
    ref.advance(r.u_ref, r.y_ref);
    xp = plant.A * xp + plant.B * r.u;
    check_finite(xp, k);
    trace.steps.push_back(std::move(r));
  }
  return trace;
}

SimTrace run_encrypted(const PlantModel& plant, const control::ControllerRealization& ctrl,
                       const control::TransformedController& t, ControllerKind kind,
                       const EncryptedParams& params, std::size_t T) {
  require(kind == ControllerKind::kGeneral || kind == ControllerKind::kPacked, ErrorCode::kInvalidArgument,
          "run_encrypted needs the general or packed kind");
  design::validate(plant, ctrl);
  const quant::QuantParams& qp = params.qp;
  quant::validate(qp);
  require(qp.N == params.bgv.N, ErrorCode::kModulusMismatch, "quantization N differs from the BGV N");

  const auto ctx = bgv::Context::create(params.bgv);
  const bgv::SecretKey key = bgv::keygen(ctx, params.seed);
  bgv::Prng setup_rng = bgv::make_stream(params.seed, 1);

  std::optional<general::GeneralEncController> gen;
  std::optional<packed::PackedEncController> pk;
  std::optional<packing::PackingContext> pack;
  if (kind == ControllerKind::kGeneral) {
    gen.emplace(general::GeneralEncController::setup(key, t, qp, setup_rng));
  } else {
    pack.emplace(ctx->plaintext_ring());
    pk.emplace(packed::PackedEncController::setup(key, t, qp, *pack, setup_rng));
  }

  SimTrace trace;
  trace.kind = kind;
  trace.h = plant.h();
  trace.l = plant.l();
  NominalLoop ref(plant, ctrl);
  OracleState shadow(t, qp);
  Vec xp = plant.xp0;
  for (std::size_t k = 0; k < T; ++k) {
    StepRecord r;
    r.k = k;
    ref.outputs(r.u_ref, r.y_ref);
    r.xp = xp;
    r.range_ok = shadow.range_ok(kind);
    if (!r.range_ok && qp.mode == quant::RangeMode::kStrict) {
      fail(ErrorCode::kRangeExceeded,
           "step " + std::to_string(k) + ": controller output leaves Z_N (modulus condition violated)");
    }
    try {
      bgv::Prng rng = bgv::make_stream(params.seed, 2 + k);
      const auto t0 = std::chrono::steady_clock::now();
      r.y = plant.C * xp;
      r.wrapped += quant::quantize(r.y, qp.L, qp.N, qp.mode).wrapped;
      std::vector<i128> uq;
      if (gen) {
        auto y_enc = general::sensor_encrypt(r.y, qp, key, rng, &r.counters);
        const auto u_bar = gen->output(&r.counters);
        auto act = general::actuator_step(u_bar, key, qp, rng, &r.counters);
        for (const auto& c : y_enc) r.comm_integers += c.integer_count();
        for (const auto& c : act.u_enc) r.comm_integers += c.integer_count();
        for (const auto& c : u_bar) r.comm_integers += c.integer_count();
        if (!trace.storage) {
          Storage s = gen->storage();
          for (const auto& c : act.u_enc) s.u += c.size();
          for (const auto& c : u_bar) s.u_bar += c.size();
          for (const auto& c : y_enc) s.y += c.size();
          trace.storage = s;
        }
        gen->update(std::move(y_enc), std::move(act.u_enc));
        r.u = std::move(act.u);
        r.u_int = std::move(act.u_int);
        uq = std::move(act.u_requant);
      } else {
        auto y_enc = packed::duplicate_pack_encrypt(r.y, qp, *pack, pk->layout(), key, rng, &r.counters);
        const auto u_bar = pk->output(&r.counters);
        auto act = packed::actuator_partition_sum(u_bar, key, qp, *pack, pk->layout(), rng, &r.counters);
        r.comm_integers = y_enc.integer_count() + act.u_enc.integer_count() + u_bar.integer_count();
        if (!trace.storage) {
          Storage s = pk->storage();
          s.u = act.u_enc.size();
          s.u_bar = u_bar.size();
          s.y = y_enc.size();
          trace.storage = s;
        }
        pk->update(std::move(y_enc), std::move(act.u_enc));
        r.u = std::move(act.u);
        r.u_int = std::move(act.u_int);
        uq = std::move(act.u_requant);
      }
      const auto t1 = std::chrono::steady_clock::now();
      r.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
      r.wrapped += quant::quantize(r.u, qp.L, qp.N, qp.mode).wrapped;
    } catch (const Error& e) {
      rethrow_at(e, k);
    }
    shadow.update(raw_quantize(r.y, qp.L), raw_quantize(r.u, qp.L));
    r.err_inf = step_error(r);
    ref.advance(r.u_ref, r.y_ref);
    xp = plant.A * xp + plant.B * r.u;
    check_finite(xp, k);
    trace.steps.push_back(std::move(r));
  }
  return trace;
}

ErrorMetrics error_metrics(const SimTrace& trace) {
  ErrorMetrics m;
  for (const auto& r : trace.steps) {
    const double e = step_error(r);
    m.per_step.push_back(e);
    m.max_err = std::max(m.max_err, e);
    m.max_u_err = std::max(m.max_u_err, inf_norm(Vec(r.u - r.u_ref)));
  }
  return m;
}

ErrorMetrics error_metrics(const SimTrace& trace, const SimTrace& ref) {
  require(trace.steps.size() == ref.steps.size(), ErrorCode::kLengthMismatch, "traces differ in length");
  ErrorMetrics m;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& a = trace.steps[k];
    const auto& b = ref.steps[k];
    const double eu = inf_norm(Vec(a.u - b.u));
    const double e = std::max(eu, inf_norm(Vec(a.y - b.y)));
    m.per_step.push_back(e);
    m.max_err = std::max(m.max_err, e);
    m.max_u_err = std::max(m.max_u_err, eu);
  }
  return m;
}

std::size_t decomposition_length(u128 q, std::uint64_t nu) {
  require(nu >= 2, ErrorCode::kInvalidArgument, "decomposition base must be at least 2");
  std::size_t d = 0;
  for (u128 pw = nu; pw <= q; pw *= nu) {
    ++d;
    if (pw > q / nu) break;
  }
  return d;
}

CostReport cost_report(std::size_t n, std::size_t h, std::size_t l, std::size_t p, u128 q, std::uint64_t nu) {
  CostReport c;
  c.n = n;
  c.h = h;
  c.l = l;
  c.p = p;
  c.nu = nu;
  c.d = decomposition_length(q, nu);
  c.general_formula = {h + l, h, h * (n * h + n * l - 1), h * n * (h + l), 4 * h * n * (h + l)};
  c.packed_formula = {2, 1, 2 * n - 1, 2 * n, 8 * n};
  c.general_storage_formula = {2 * h, 3 * h, 2 * l, 2 * n * (h + l), 2 * h * n * (h + l)};
  c.packed_storage_formula = {2, 3, 2, 4 * n, 4 * n};
  c.alg1_poly_mults = 8 * n;
  c.alg1_comm = 7 * p;
  c.relinearized_comm = 6 * p;
  c.rotation_poly_mults = 4 * (n + 1) + 2 * c.d * (n + h + l);
  c.rotation_comm = 6 * p;
  c.external_products = n * n + 2 * h * n + l * n;
  c.external_scalar_mults = static_cast<long double>(c.external_products) * c.d *
                            static_cast<long double>(p + 1) * static_cast<long double>(p + 1);
  c.elementwise_lwe_comm = (2 * h + l) * (p + 1);
  c.notes = {
      "packed controller: O(n p log p) scalar multiplications per step, 7p integers communicated",
      "relinearizing ubar before transmission would reduce communication to 6p",
      "rotation-based packing: (n+1) multiplications and relinearizations plus (h+l-1) rotations, 6p integers",
      "element-wise LWE with external products: (n^2+2hn+ln) products of d(p+1)^2 scalar multiplications, "
      "(2h+l)(p+1) integers",
  };
  return c;
}

bgv::OpCounters per_step_counters(const SimTrace& trace) {
  require(!trace.steps.empty(), ErrorCode::kInvalidArgument, "empty trace");
  const bgv::OpCounters first = trace.steps.front().counters;
  for (const auto& r : trace.steps) {
    require(r.counters == first, ErrorCode::kInternal, "per-step counters vary at step " + std::to_string(r.k));
  }
  return first;
}

void write_csv(std::ostream& out, const SimTrace& trace, bool include_wall_time) {
  out << "k";
  for (std::size_t i = 1; i <= trace.h; ++i) out << ",u_" << i;
  for (std::size_t i = 1; i <= trace.l; ++i) out << ",y_" << i;
  for (std::size_t i = 1; i <= trace.h; ++i) out << ",uref_" << i;
  for (std::size_t i = 1; i <= trace.l; ++i) out << ",yref_" << i;
  out << ",err_inf,enc,dec,add,mult,comm_ints,wall_ns\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& r : trace.steps) {
    out << r.k;
    for (Eigen::Index i = 0; i < r.u.size(); ++i) num(r.u(i));
    for (Eigen::Index i = 0; i < r.y.size(); ++i) num(r.y(i));
    for (Eigen::Index i = 0; i < r.u_ref.size(); ++i) num(r.u_ref(i));
    for (Eigen::Index i = 0; i < r.y_ref.size(); ++i) num(r.y_ref(i));
    num(r.err_inf);
    out << ',' << r.counters.enc << ',' << r.counters.dec << ',' << r.counters.add << ',' << r.counters.mult
        << ',' << r.comm_integers << ',' << (include_wall_time ? r.wall_ns : 0) << '\n';
  }
}

}  // namespace encctl::sim
