#pragma once

// JSON run configuration.
//
// {
//   "plant":      {"A": M, "B": M, "C": M, "xp0": [..]},
//   "controller": {"F": M, "G": M, "H": M, "x0": [..]}
//              or {"observer": {"L": M, "K": M}, "x0": [..]},   F = A - L C + B K
//   "quantization": {"inv_L": 2000, "inv_s": 10000},            or {"L": .., "s": ..}
//   "encryption": {"N": "65929217", "q": "...", "p": 4096, "sigma": 3.2,
//                  "seed": 1, "r_bar": 35},
//   "T": 200, "kind": "packed", "mode": "strict", "sampling_period": 0.05
// }
//
// A matrix M is {"rows": r, "cols": c, "data": [row-major]} or a list of rows.
// N and q accept decimal strings or integers. Omitted r_bar defaults to
// max(n (h + l), 2 n).

#include <cstdint>
#include <optional>
#include <string>

#include "encctl/bgv.hpp"
#include "encctl/control.hpp"
#include "encctl/design.hpp"
#include "encctl/quantization.hpp"
#include "encctl/sim.hpp"

namespace encctl::config {

struct RunConfig {
  design::PlantModel plant;
  control::ControllerRealization controller;
  double L = 0, s = 0;
  bgv::BgvParams bgv;
  std::uint64_t seed = 1;
  std::size_t T = 100;
  sim::ControllerKind kind = sim::ControllerKind::kPacked;
  quant::RangeMode mode = quant::RangeMode::kStrict;
  double sampling_period = 0;

  quant::QuantParams quant_params() const { return {L, s, bgv.N, mode}; }
  sim::EncryptedParams encrypted_params() const { return {quant_params(), bgv, seed}; }
};

/// Throws kConfigInvalid (schema, dimensions, packed slot capacity).
RunConfig parse(const std::string& json_text);
/// Throws kIo or kConfigInvalid.
RunConfig load(const std::string& path);

quant::RangeMode parse_mode(const std::string& text);

}  // namespace encctl::config
