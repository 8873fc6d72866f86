#include "encctl/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "encctl/error.hpp"

namespace encctl::config {

using nlohmann::json;
using control::Mat;
using control::Vec;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::kConfigInvalid, what); }

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where + ": missing '" + key + "'");
  return obj.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  return j.get<double>();
}

Mat matrix(const json& j, const std::string& where) {
  if (j.is_object()) {
    const auto rows = field(j, "rows", where).get<std::int64_t>();
    const auto cols = field(j, "cols", where).get<std::int64_t>();
    const json& data = field(j, "data", where);
    if (rows < 1 || cols < 1 || !data.is_array() || static_cast<std::int64_t>(data.size()) != rows * cols)
      bad(where + ": data must hold rows * cols numbers");
    Mat m(rows, cols);
    for (std::int64_t i = 0; i < rows * cols; ++i) m(i / cols, i % cols) = number(data[i], where);
    return m;
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    if (cols < 1) bad(where + ": empty row");
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) bad(where + ": ragged rows");
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(j[r][c], where);
    }
    return m;
  }
  bad(where + ": expected a matrix");
}

Vec vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where + ": expected a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

u128 big(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_u128(j.get<std::string>());
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<u128>(j.get<std::int64_t>());
  } catch (const Error&) {
  }
  bad(where + ": expected a non-negative integer or decimal string");
}

double positive_scale(const json& q, const char* direct, const char* inverse) {
  if (q.contains(direct)) {
    const double v = number(q.at(direct), std::string("quantization.") + direct);
    if (!(v > 0)) bad(std::string("quantization.") + direct + " must be positive");
    return v;
  }
  const double inv = number(field(q, inverse, "quantization"), std::string("quantization.") + inverse);
  if (!(inv > 0)) bad(std::string("quantization.") + inverse + " must be positive");
  return 1.0 / inv;
}

}  // namespace

quant::RangeMode parse_mode(const std::string& text) {
  if (text == "strict") return quant::RangeMode::kStrict;
  if (text == "wraparound-demo") return quant::RangeMode::kWraparoundDemo;
  bad("unknown mode '" + text + "'");
}

RunConfig parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  RunConfig c;
  try {
    const json& plant = field(doc, "plant", "config");
    c.plant.A = matrix(field(plant, "A", "plant"), "plant.A");
    c.plant.B = matrix(field(plant, "B", "plant"), "plant.B");
    c.plant.C = matrix(field(plant, "C", "plant"), "plant.C");
    c.plant.xp0 = vector(field(plant, "xp0", "plant"), "plant.xp0");

    const json& ctrl = field(doc, "controller", "config");
    if (ctrl.contains("observer")) {
      const json& obs = ctrl.at("observer");
      const Mat Lc = matrix(field(obs, "L", "controller.observer"), "controller.observer.L");
      const Mat Kc = matrix(field(obs, "K", "controller.observer"), "controller.observer.K");
      if (Lc.rows() != c.plant.A.rows() || Lc.cols() != c.plant.C.rows() || Kc.rows() != c.plant.B.cols() ||
          Kc.cols() != c.plant.A.rows() || c.plant.C.cols() != c.plant.A.rows() ||
          c.plant.B.rows() != c.plant.A.rows())
        bad("controller.observer: gain dimensions do not match the plant");
      c.controller.F = c.plant.A - Lc * c.plant.C + c.plant.B * Kc;
      c.controller.G = Lc;
      c.controller.H = Kc;
    } else {
      c.controller.F = matrix(field(ctrl, "F", "controller"), "controller.F");
      c.controller.G = matrix(field(ctrl, "G", "controller"), "controller.G");
      c.controller.H = matrix(field(ctrl, "H", "controller"), "controller.H");
    }
    c.controller.x0 = vector(field(ctrl, "x0", "controller"), "controller.x0");
    try {
      design::validate(c.plant, c.controller);
    } catch (const Error& e) {
      bad(e.what());
    }

    const json& q = field(doc, "quantization", "config");
    c.L = positive_scale(q, "L", "inv_L");
    c.s = positive_scale(q, "s", "inv_s");
    if (c.s > 1) bad("quantization: 1/s must be at least 1");

    const json& enc = field(doc, "encryption", "config");
    c.bgv.N = big(field(enc, "N", "encryption"), "encryption.N");
    c.bgv.q = big(field(enc, "q", "encryption"), "encryption.q");
    c.bgv.p = field(enc, "p", "encryption").get<std::size_t>();
    c.bgv.sigma = enc.contains("sigma") ? number(enc.at("sigma"), "encryption.sigma") : 3.2;
    c.seed = enc.contains("seed") ? enc.at("seed").get<std::uint64_t>() : 1;
    const std::size_t n = c.controller.n(), h = c.controller.h(), l = c.controller.l();
    c.bgv.r_bar = enc.contains("r_bar") ? enc.at("r_bar").get<std::size_t>() : std::max(n * (h + l), 2 * n);

    if (doc.contains("T")) c.T = doc.at("T").get<std::size_t>();
    if (doc.contains("kind")) c.kind = sim::parse_kind(doc.at("kind").get<std::string>());
    if (doc.contains("mode")) c.mode = parse_mode(doc.at("mode").get<std::string>());
    if (doc.contains("sampling_period")) c.sampling_period = number(doc.at("sampling_period"), "sampling_period");
  } catch (const json::exception& e) {
    bad(std::string("schema error: ") + e.what());
  }
  if (c.kind == sim::ControllerKind::kPacked) {
    const std::size_t h = c.controller.h(), l = c.controller.l();
    if (c.bgv.p < h * std::max(h, l)) bad("packed kind needs p >= h max(h, l)");
  }
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace encctl::config
