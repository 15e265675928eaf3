// Command-line front end: run verification suites, decompose a scenario
// under the casimir, normalize enveloping-algebra expressions, and table
// the ball restrictions of a scenario's Frobenius sheaf.
//
// Exit codes: 0 everything passed, 1 a verification failed, 2 the input
// could not be used (bad flags, parse errors, missing structure).
//
// Output is deterministic: checks run in a fixed order, decomposition rows
// are sorted by eigenvalue, scenario-driven checks by scenario label, and
// json objects serialize with sorted keys. Set PHIGAMMA_REPORT_DIR to also
// write each report to a file there.

#include <phigamma/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace phigamma;

#ifndef PHIGAMMA_SCENARIO_DIR
#define PHIGAMMA_SCENARIO_DIR "scenarios"
#endif

std::string scenario_dir() {
  if (const char* env = std::getenv("PHIGAMMA_SCENARIO_DIR")) return env;
  return PHIGAMMA_SCENARIO_DIR;
}

// print to stdout and, when PHIGAMMA_REPORT_DIR is set, mirror into a file
void deliver(const std::string& stem, bool as_json, const std::string& body) {
  std::cout << body;
  if (const char* dir = std::getenv("PHIGAMMA_REPORT_DIR")) {
    std::filesystem::create_directories(dir);
    std::filesystem::path file =
        std::filesystem::path(dir) / (stem + (as_json ? ".json" : ".txt"));
    std::ofstream out(file);
    out << body;
  }
}

// descending-degree polynomial in T from ascending coefficients
std::string poly_to_string(const std::vector<Rational>& cs) {
  std::string out;
  for (std::size_t j = cs.size(); j-- > 0;) {
    const Rational& c = cs[j];
    if (c == 0) continue;
    Rational mag = c < 0 ? Rational(-c) : c;
    out += out.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
    bool bare = mag == 1 && j > 0;
    if (!bare) out += to_string(mag);
    if (j > 0) {
      if (!bare) out += "*";
      out += "T";
      if (j > 1) out += "^" + std::to_string(j);
    }
  }
  return out.empty() ? "0" : out;
}

std::vector<std::string> rationals_to_strings(const std::vector<Rational>& xs) {
  std::vector<std::string> out;
  for (const Rational& x : xs) out.push_back(to_string(x));
  return out;
}

int run_verify(const std::string& suite, bool as_json) {
  const std::vector<std::string> names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    std::string all;
    for (const std::string& n : names) all += (all.empty() ? "" : ", ") + n;
    std::cerr << "unknown suite '" << suite << "' (available: " << all << ")\n";
    return 2;
  }
  SuiteReport rep = run_suite(suite, scenario_dir());
  std::string body;
  if (as_json) {
    json j;
    j["suite"] = rep.suite;
    j["failures"] = rep.failures();
    j["checks"] = json::array();
    for (const CheckResult& c : rep.checks)
      j["checks"].push_back({{"name", c.name},
                             {"statement", c.statement},
                             {"pass", c.pass},
                             {"detail", c.detail}});
    body = j.dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "suite " << rep.suite << "\n";
    for (const CheckResult& c : rep.checks) {
      out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << ": " << c.statement << "\n";
      if (!c.pass) out << "         " << c.detail << "\n";
    }
    out << rep.checks.size() << " checks, " << rep.failures() << " failures\n";
    body = out.str();
  }
  deliver("verify-" + suite, as_json, body);
  return rep.all_pass() ? 0 : 1;
}

int run_decompose(const std::string& file, std::optional<unsigned> k_flag,
                  const std::string& alpha_flag, std::optional<std::size_t> trunc_flag,
                  bool as_json) {
  Scenario sc = load_scenario(file);
  std::optional<Rational> alpha_override;
  if (!alpha_flag.empty()) {
    try {
      alpha_override = parse_rational(alpha_flag);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("option --alpha: ") + e.what());
    }
  }
  std::vector<unsigned> ks;
  if (k_flag) {
    ks = {*k_flag};
  } else if (!sc.ks.empty()) {
    ks = sc.ks;
  } else {
    ks = {1};
  }
  TorsionModule d = sc.module(trunc_flag, alpha_override);
  Rational alpha = alpha_override.value_or(sc.alpha);

  json jrep;
  jrep["scenario"] = sc.label;
  jrep["runs"] = json::array();
  std::ostringstream out;
  for (unsigned k : ks) {
    SpectralReport rep = spectral_decomposition(tensor_vk(d, k, alpha));
    std::vector<const SpectralPiece*> rows;
    for (const SpectralPiece& piece : rep.pieces) rows.push_back(&piece);
    std::sort(rows.begin(), rows.end(),
              [](const SpectralPiece* a, const SpectralPiece* b) { return a->mu < b->mu; });
    if (as_json) {
      json run;
      run["k"] = k;
      run["alpha"] = to_string(alpha);
      run["trunc"] = d.trunc;
      run["residual"] = rep.residual_dim;
      run["pieces"] = json::array();
      for (const SpectralPiece* piece : rows)
        run["pieces"].push_back({{"mu", to_string(piece->mu)},
                                 {"dim", piece->dim()},
                                 {"indices", piece->indices},
                                 {"kernel_dims", piece->kernel_dims},
                                 {"sen", rationals_to_strings(piece->sen_poly)},
                                 {"semisimple", piece->semisimple},
                                 {"saturated", piece->saturated},
                                 {"split", piece->split.split()},
                                 {"tag", piece->tag}});
      jrep["runs"].push_back(std::move(run));
    } else {
      out << "scenario " << sc.label << " (k = " << k << ", alpha = " << to_string(alpha)
          << ", trunc = " << d.trunc << ")\n";
      for (const SpectralPiece* piece : rows) {
        out << "  mu = " << to_string(piece->mu) << "  dim " << piece->dim() << "  sen "
            << poly_to_string(piece->sen_poly) << "  " << piece->tag << "  ["
            << (piece->semisimple ? "semisimple" : "non-semisimple") << ", "
            << (piece->split.split() ? "split" : "non-split") << ", "
            << (piece->saturated ? "saturated" : "unsaturated") << "]\n";
      }
      out << "  residual " << rep.residual_dim << "\n";
    }
  }
  deliver("decompose-" + sc.label, as_json, as_json ? jrep.dump(2) + "\n" : out.str());
  return 0;
}

int run_pbw(const std::string& expr, const std::string& central, bool as_json) {
  UEAElement a = parse_uea(expr);
  std::optional<std::pair<Rational, Rational>> zm;
  if (!central.empty()) {
    std::size_t comma = central.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("option --central: expected 'zeta,mu'");
    try {
      zm = {parse_rational(central.substr(0, comma)), parse_rational(central.substr(comma + 1))};
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("option --central: ") + e.what());
    }
    a = reduce_central(a, zm->first, zm->second);
  }
  std::string normal = uea_to_string(a);
  if (as_json) {
    json j;
    j["input"] = expr;
    j["result"] = normal;
    if (zm) j["central"] = {to_string(zm->first), to_string(zm->second)};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << normal << "\n";
  }
  return 0;
}

int run_sheaf(const std::string& file, unsigned level, bool as_json) {
  Scenario sc = load_scenario(file);
  TorsionModule d = sc.module();
  if (!d.phi_mat)
    throw std::invalid_argument("scenario '" + sc.label +
                                "' has no Frobenius (phi); ball restrictions need one");
  long pn = 1;
  for (unsigned s = 0; s < level; ++s) pn *= d.prime;
  std::vector<BallRestriction> balls;
  for (long i = 0; i < pn; ++i)
    balls.push_back(ball_restriction(d, static_cast<unsigned long>(i), level));
  std::size_t q = balls.at(0).precision;

  // the restrictions to the p^level balls must reassemble the truncation
  QMat sum(d.rank * q, d.dim());
  for (const BallRestriction& b : balls) sum = sum + b.op;
  QMat project(d.rank * q, d.dim());
  for (std::size_t r = 0; r < d.rank; ++r)
    for (std::size_t m = 0; m < q; ++m) project.at(r * q + m, d.idx(r, m)) = 1;
  bool partition = sum == project;

  std::string body;
  if (as_json) {
    json j;
    j["scenario"] = sc.label;
    j["level"] = level;
    j["precision"] = q;
    j["partition"] = partition;
    j["centers"] = json::array();
    for (const BallRestriction& b : balls)
      j["centers"].push_back({{"center", b.center}, {"rank", b.op.rank()}});
    body = j.dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "scenario " << sc.label << " (p = " << d.prime << ", trunc = " << d.trunc
        << ", level = " << level << ")\n";
    for (const BallRestriction& b : balls)
      out << "  center " << b.center << "  rank " << b.op.rank() << "\n";
    out << "  partition of unity: " << (partition ? "PASS" : "FAIL") << " (precision " << q
        << ")\n";
    body = out.str();
  }
  deliver("sheaf-" + sc.label + "-n" + std::to_string(level), as_json, body);
  return partition ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact translation engine for truncated (phi, Gamma)-modules"};
  app.require_subcommand(1);

  CLI::App* verify = app.add_subcommand("verify", "run a named verification suite");
  std::string suite;
  bool verify_json = false;
  verify->add_option("suite", suite, "one of: " + [] {
        std::string all;
        for (const std::string& n : suite_names()) all += (all.empty() ? "" : ", ") + n;
        return all;
      }())
      ->required();
  verify->add_flag("--json", verify_json, "emit the report as json");

  CLI::App* decompose =
      app.add_subcommand("decompose", "casimir decomposition of a scenario's translation");
  std::string dfile, alpha_flag;
  bool decompose_json = false;
  std::optional<unsigned> k_flag;
  std::optional<std::size_t> trunc_flag;
  decompose->add_option("file", dfile, "scenario file")->required();
  decompose->add_option("--k", k_flag, "translation weight (default: the scenario's list)");
  decompose->add_option("--alpha", alpha_flag, "override the gl2 parameter (rational)");
  decompose->add_option("--trunc", trunc_flag, "override the truncation length");
  decompose->add_flag("--json", decompose_json, "emit the report as json");

  CLI::App* pbw = app.add_subcommand("pbw", "normalize an enveloping-algebra expression");
  std::string expr, central;
  bool pbw_json = false;
  pbw->add_option("expr", expr, "expression in u+, u-, h, z, a+, a-, c")->required();
  pbw->add_option("--central", central, "evaluate z and the casimir: 'zeta,mu'");
  pbw->add_flag("--json", pbw_json, "emit the result as json");

  CLI::App* sheaf = app.add_subcommand("sheaf", "ball restrictions of a scenario's Frobenius");
  std::string sfile;
  unsigned level = 1;
  bool sheaf_json = false;
  sheaf->add_option("--scenario", sfile, "scenario file (needs a Frobenius)")->required();
  sheaf->add_option("--level", level, "restrict to balls i + p^level Z_p");
  sheaf->add_flag("--json", sheaf_json, "emit the report as json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return run_verify(suite, verify_json);
    if (decompose->parsed())
      return run_decompose(dfile, k_flag, alpha_flag, trunc_flag, decompose_json);
    if (pbw->parsed()) return run_pbw(expr, central, pbw_json);
    if (sheaf->parsed()) return run_sheaf(sfile, level, sheaf_json);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
