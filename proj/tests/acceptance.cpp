// Acceptance gate: one line per structural claim the library is supposed
// to certify, each backed by named checks from the verification suites.
// Exits 0 only when every criterion passes.

#include <phigamma/verify.hpp>

#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#ifndef PHIGAMMA_SCENARIO_DIR
#define PHIGAMMA_SCENARIO_DIR "scenarios"
#endif

namespace {

struct Criterion {
  const char* id;
  const char* claim;
  const char* suite;
  std::vector<std::string> checks;  // empty: the whole suite must pass
};

}  // namespace

int main() {
  const char* env = std::getenv("PHIGAMMA_SCENARIO_DIR");
  const std::string dir = env ? env : PHIGAMMA_SCENARIO_DIR;

  const std::vector<Criterion> criteria = {
      {"C1", "PBW normal form: (h^2 - 2h + 4u+u-) - (h^2 + 2h + 4u-u+) == 0",
       "notation", {"casimir-normal-form"}},
      {"C2", "V_k structure: c = k(k+2), z = k for k <= 6; alpha -> alpha.e intertwines the "
             "X-, phi-, gamma-actions with the ring quotient",
       "symk", {}},
      {"C3", "1 (x) e is killed by nabla and fixed by phi; R (x) V_1 splits as R + tR",
       "rankone", {"lowest-vector", "line-splits"}},
      {"C4", "tensor laws psi(v (x) w) == psi(v) (x) phi^{-1}(w) and Res(x (x) w) == Res(x) (x) w "
             "on three etale models, p in {2,3}, k in {1,2}, n in {0,1}, with negative controls",
       "sheaf", {"tensor-psi", "tensor-psi-negative", "tensor-res", "tensor-res-negative"}},
      {"C5", "diagonal (0, alpha), alpha in {3/2, 2, 5}, k = 1: spectrum {(alpha+1)^2-1, "
             "(alpha-1)^2-1}, Sen polynomials T(T-(alpha+1)) and (T-1)(T-alpha), direct sum, "
             "stable across N in {8, 12}",
       "casimir1", {"separated-spectrum", "separated-sen", "separated-clean"}},
      {"C6", "nilpotent model k = 1: single eigenvalue 0, dim ker(c) == dim ker(c^2)/2, "
             "non-split; zero model: ker(c^2) is everything and D + tD splits",
       "casimir1", {"nilpotent-halving", "nilpotent-nonsplit", "zero-total", "zero-splits"}},
      {"C7", "diagonal (0, 3/2) and (0, 5), k in {2, 3}: spectrum {(alpha+k-2i)^2 - 1}, piece i "
             "has Sen polynomial (T-i)(T-(alpha+k-i)), residual zero",
       "decomp", {"separated-spectrum-k", "separated-sen-k", "separated-clean-k"}},
      {"C8", "k = 2 merged piece at 3: non-semisimple self-extension on the nilpotent model, "
             "D + t^2 D with a projector on the zero model",
       "decomp", {"nilpotent-k2", "zero-k2"}},
      {"C9", "trivial line, alpha in {3/2, 0}, k <= 3: pieces are the twists t^i Delta; at "
             "alpha = 0 the merged eigenspace is Delta + t^k Delta",
       "rankone", {"alpha-3half-twists", "alpha-zero-merged"}},
      {"C10", "{x : (nabla-i+1)...nabla x in t^i D} == proj_0 of the top eigenspace below the "
              "truncation tail on every bundled scenario",
       "nablacond", {}},
      {"C11", "(t^{-1} nabla)^k == t^{-k} (nabla-k+1)...nabla on its exact domain, k <= 3, three "
              "shapes; chain kernels confined to the top k filtration degrees",
       "partial", {}},
      {"C12", "one scalar law s = det(g)^{-1} for both conjugation displays across >= 50 random "
              "g and alpha in {0, 3/2, 5}",
       "lie", {}},
  };

  std::map<std::string, phigamma::SuiteReport> cache;
  auto report = [&](const std::string& suite) -> const phigamma::SuiteReport& {
    auto it = cache.find(suite);
    if (it == cache.end()) it = cache.emplace(suite, phigamma::run_suite(suite, dir)).first;
    return it->second;
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    const phigamma::SuiteReport& rep = report(c.suite);
    bool ok = true;
    std::string why;
    if (c.checks.empty()) {
      ok = rep.all_pass();
      if (!ok)
        for (const phigamma::CheckResult& r : rep.checks)
          if (!r.pass) why = r.name + ": " + r.detail;
    } else {
      for (const std::string& name : c.checks) {
        const phigamma::CheckResult* found = nullptr;
        for (const phigamma::CheckResult& r : rep.checks)
          if (r.name == name) found = &r;
        if (!found) {
          ok = false;
          why = "missing check '" + name + "'";
        } else if (!found->pass) {
          ok = false;
          why = found->name + ": " + found->detail;
        }
      }
    }
    all = all && ok;
    std::printf("%s %s: %s\n", c.id, c.claim, ok ? "PASS" : "FAIL");
    if (!ok) std::printf("   ^ %s\n", why.c_str());
  }
  std::printf("%s\n", all ? "all 12 criteria passed" : "ACCEPTANCE FAILED");
  return all ? 0 : 1;
}
