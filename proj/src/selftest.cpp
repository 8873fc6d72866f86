#include "encctl/selftest.hpp"

#include <span>

#include "encctl/error.hpp"
#include "encctl/packing.hpp"
#include "encctl/ring.hpp"

namespace encctl::selftest {

bool Report::pass() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

std::string show(std::span<const i128> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_string(v[i]);
  return s + "]";
}

template <typename A, typename B>
CheckResult compare(std::string name, const A& got, const B& want) {
  std::vector<i128> g(got.begin(), got.end()), w(want.begin(), want.end());
  CheckResult r{std::move(name), g == w, ""};
  r.detail = "got " + show(g) + ", expected " + show(w);
  return r;
}

}  // namespace

Report run(const GoldenVectors& golden) {
  Report rep;
  try {
    const auto mod = ring::Modulus::create(golden.N, golden.p);
    const u128 root = ring::find_primitive_root(golden.N, golden.p);
    rep.checks.push_back({"primitive root", root == golden.root,
                          "got " + to_string(root) + ", expected " + to_string(golden.root)});
    packing::PackingContext ctx(mod);
    const auto fu = ctx.pack(golden.u);
    const auto fv = ctx.pack(golden.v);
    rep.checks.push_back(compare("pack u", fu.coeffs(), golden.pack_u));
    rep.checks.push_back(compare("pack v", fv.coeffs(), golden.pack_v));
    rep.checks.push_back(compare("unpack sum", ctx.unpack(ring::poly_add(fu, fv)), golden.sum_slots));
    const auto prod = ring::poly_mul(fu, fv);
    rep.checks.push_back(compare("product polynomial", prod.coeffs(), golden.product));
    rep.checks.push_back(compare("product schoolbook", ring::poly_mul_schoolbook(fu, fv).coeffs(), golden.product));
    rep.checks.push_back(compare("unpack product", ctx.unpack(prod), golden.product_slots));
  } catch (const Error& e) {
    rep.checks.push_back({"golden vectors", false, e.what()});
  }
  return rep;
}

}  // namespace encctl::selftest
