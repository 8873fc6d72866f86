#pragma once

// Closed-loop simulation of a plant against the nominal controller, the
// plaintext quantized controller and the two encrypted controllers.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "encctl/bgv.hpp"
#include "encctl/control.hpp"
#include "encctl/design.hpp"
#include "encctl/enc_general.hpp"
#include "encctl/quantization.hpp"

namespace encctl::sim {

using control::Mat;
using control::Vec;
using design::PlantModel;

enum class ControllerKind { kNominal, kOracle, kGeneral, kPacked };

std::string to_string(ControllerKind kind);
/// Throws kConfigInvalid.
ControllerKind parse_kind(const std::string& text);

/// States beyond this magnitude count as divergence.
inline constexpr double kDivergenceLimit = 1e12;

struct StepRecord {
  std::size_t k = 0;
  Vec u, y;          // applied input, measured output
  Vec u_ref, y_ref;  // nominal loop
  Vec xp;            // plant state x_p(k)
  double err_inf = 0;
  bgv::OpCounters counters;  // this step only
  std::size_t comm_integers = 0;
  std::int64_t wall_ns = 0;
  std::vector<i128> u_int;   // integer controller output before rescaling
  bool range_ok = true;      // shadow check of the modulus condition
  std::size_t wrapped = 0;   // entries wrapped in wraparound-demo mode
};

using Storage = general::StorageCounts;

struct SimTrace {
  ControllerKind kind = ControllerKind::kNominal;
  std::size_t h = 0, l = 0;
  std::vector<StepRecord> steps;
  /// Polynomials held per encrypted quantity (encrypted kinds only).
  std::optional<Storage> storage;
};

struct EncryptedParams {
  quant::QuantParams qp;
  bgv::BgvParams bgv;
  std::uint64_t seed = 1;
};

/// Plant and controller in floating point. Throws kUnstable on divergence.
SimTrace run_nominal(const PlantModel& plant, const control::ControllerRealization& ctrl, std::size_t T);

/// Exact integer dynamics of the quantized re-realized controller. Out-of-range
/// values are not reduced: range_ok marks steps where an encrypted controller
/// of the given kind (general or packed) would wrap.
SimTrace run_quantized_oracle(const PlantModel& plant, const control::ControllerRealization& ctrl,
                              const control::TransformedController& t, const quant::QuantParams& qp,
                              std::size_t T, ControllerKind range_kind = ControllerKind::kGeneral);

/// Full encrypted loop. Errors carry the step index in their message.
SimTrace run_encrypted(const PlantModel& plant, const control::ControllerRealization& ctrl,
                       const control::TransformedController& t, ControllerKind kind,
                       const EncryptedParams& params, std::size_t T);

struct ErrorMetrics {
  double max_err = 0;    // max_k ||[u - u'; y - y']||
  double max_u_err = 0;  // max_k ||u - u'||
  std::vector<double> per_step;
};

/// Against the nominal reference stored in the trace.
ErrorMetrics error_metrics(const SimTrace& trace);
/// Against another trace of the same length.
ErrorMetrics error_metrics(const SimTrace& trace, const SimTrace& ref);

struct CostReport {
  std::size_t n = 0, h = 0, l = 0, p = 0;
  std::uint64_t nu = 0;
  std::size_t d = 0;  // floor(log_nu q)

  bgv::OpCounters general_formula;  // per step
  bgv::OpCounters packed_formula;
  Storage general_storage_formula;
  Storage packed_storage_formula;
  std::optional<bgv::OpCounters> general_measured;
  std::optional<bgv::OpCounters> packed_measured;
  std::optional<Storage> general_storage_measured;
  std::optional<Storage> packed_storage_measured;
  std::optional<std::size_t> packed_comm_measured;

  std::uint64_t alg1_poly_mults = 0;         // 8n
  std::uint64_t alg1_comm = 0;               // 7p
  std::uint64_t relinearized_comm = 0;       // 6p
  std::uint64_t rotation_poly_mults = 0;     // 4(n+1) + 2d(n+h+l)
  std::uint64_t rotation_comm = 0;           // 6p
  std::uint64_t external_products = 0;       // n^2 + 2hn + ln
  long double external_scalar_mults = 0;     // (n^2 + 2hn + ln) d (p+1)^2
  std::uint64_t elementwise_lwe_comm = 0;    // (2h + l)(p + 1)
  std::vector<std::string> notes;
};

std::size_t decomposition_length(u128 q, std::uint64_t nu);

CostReport cost_report(std::size_t n, std::size_t h, std::size_t l, std::size_t p, u128 q,
                       std::uint64_t nu = 1ULL << 16);

/// Per-step counters of a run, checked constant across steps. Throws kInternal otherwise.
bgv::OpCounters per_step_counters(const SimTrace& trace);

/// Header: k,u_1..u_h,y_1..y_l,uref_1..,yref_1..,err_inf,enc,dec,add,mult,comm_ints,wall_ns
void write_csv(std::ostream& out, const SimTrace& trace, bool include_wall_time = true);

}  // namespace encctl::sim
