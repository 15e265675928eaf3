#include <phigamma/scenario.hpp>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace phigamma;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = {}) {
  std::string cmd = env_prefix + PHIGAMMA_CLI_BIN + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string scn(const std::string& name) {
  return std::string(PHIGAMMA_SCENARIO_DIR) + "/" + name;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

Scenario random_scenario(std::mt19937& gen, int idx) {
  std::uniform_int_distribution<int> rankd(1, 2), truncd(4, 8), coin(0, 1), coefd(-9, 9),
      dend(1, 4), kd(0, 3);
  Scenario sc;
  sc.label = "roundtrip-" + std::to_string(idx);
  sc.rank = static_cast<std::size_t>(rankd(gen));
  sc.trunc = static_cast<std::size_t>(truncd(gen));
  sc.prime = coin(gen) ? 3 : 2;
  sc.alpha = rat(coefd(gen), dend(gen));
  auto random_mat = [&] {
    SeriesMat m(sc.rank, sc.rank, Coord::T, sc.trunc);
    for (std::size_t i = 0; i < sc.rank; ++i)
      for (std::size_t j = 0; j < sc.rank; ++j) {
        if (coin(gen)) continue;
        std::vector<Rational> cs(sc.trunc);
        for (int terms = 0; terms < 3; ++terms)
          cs[static_cast<std::size_t>(gen() % sc.trunc)] = rat(coefd(gen), dend(gen));
        m.at(i, j) = TruncSeries::from_coeffs(Coord::T, std::move(cs), sc.trunc);
      }
    return m;
  };
  sc.nabla = random_mat();
  if (coin(gen)) sc.phi = random_mat();
  for (int i = 0, nk = kd(gen); i < nk; ++i) sc.ks.push_back(static_cast<unsigned>(i + 1));
  if (coin(gen)) sc.truncs = {6, 8};
  if (coin(gen)) sc.suites = {"rankone", "sheaf"};
  return sc;
}

}  // namespace

TEST_CASE("scenario emit/parse round trip") {
  std::mt19937 gen(8842u);
  for (int i = 0; i < 40; ++i) {
    Scenario sc = random_scenario(gen, i);
    Scenario back = parse_scenario_text(emit_scenario(sc));
    CHECK(back == sc);
  }
}

TEST_CASE("bundled scenarios parse, build, and round trip") {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(PHIGAMMA_SCENARIO_DIR))
    if (e.path().extension() == ".scn") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() == 8);
  for (const fs::path& f : files) {
    INFO(f.string());
    Scenario sc = load_scenario(f.string());
    CHECK(sc.label == f.stem().string());
    TorsionModule d = sc.module();
    CHECK(d.rank == sc.rank);
    CHECK(d.trunc == sc.trunc);
    for (std::size_t n : sc.truncs) CHECK(sc.module(n).trunc == n);
    CHECK(parse_scenario_text(emit_scenario(sc)) == sc);
  }
}

TEST_CASE("scenario diagnostics carry line numbers") {
  auto fails = [](const std::string& text, const std::string& needle) {
    try {
      parse_scenario_text(text);
      FAIL("expected a ScenarioError for: " << needle);
    } catch (const ScenarioError& e) {
      INFO(e.what());
      CHECK(contains(e.what(), needle));
    }
  };
  const std::string valid =
      "label = x\nrank = 1\ntrunc = 4\nprime = 2\n";
  fails("label = x\nrank = 1\nbogus\n", "line 3: expected 'key = value', got 'bogus'");
  fails("label = x\nlabel = y\n", "line 2: duplicate key 'label' (first on line 1)");
  fails(valid + "wibble = 3\n", "line 5: unknown key 'wibble'");
  fails(valid + "nabla.1.0 = 2\n", "line 5: key 'nabla.1.0': index out of range for rank 1");
  fails(valid + "nabla.0 = 2\n", "must look like nabla.<row>.<col>");
  fails("label = x\nrank = -1\n", "line 2: key 'rank': expected a non-negative integer, got '-1'");
  fails(valid + "nabla.0.0 = 2*q\n", "line 5: key 'nabla.0.0'");
  fails(valid + "nabla.0.0 = t^9\n", "degree 9 exceeds truncation 4");
  fails("label = x\nrank = 1\nprime = 2\n", "missing required key 'trunc'");
  fails("label = x\nrank = 0\ntrunc = 4\nprime = 2\n", "rank must be positive");
  fails("label =\nrank = 1\ntrunc = 4\nprime = 2\n", "line 1: key 'label' has an empty value");
  fails(valid + "alpha = 1/0\n", "line 5: key 'alpha'");
  CHECK_THROWS_WITH(load_scenario("/nonexistent/x.scn"),
                    Catch::Matchers::ContainsSubstring("cannot open scenario file"));
}

TEST_CASE("cli: verify") {
  RunResult bad = run_cli("verify nosuch");
  CHECK(bad.code == 2);
  CHECK(contains(bad.out, "unknown suite 'nosuch'"));

  RunResult ok = run_cli("verify notation");
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "[PASS] casimir-normal-form"));
  CHECK(contains(ok.out, "5 checks, 0 failures"));
  CHECK(run_cli("verify notation").out == ok.out);  // byte-stable

  RunResult js = run_cli("verify notation --json");
  CHECK(js.code == 0);
  nlohmann::json j = nlohmann::json::parse(js.out);
  CHECK(j["suite"] == "notation");
  CHECK(j["failures"] == 0);
  CHECK(j["checks"].size() == 5);
}

TEST_CASE("cli: decompose") {
  RunResult r = run_cli("decompose " + scn("diag-0-5.scn") + " --k 1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "mu = 35"));
  CHECK(contains(r.out, "mu = 15"));
  CHECK(contains(r.out, "diagonal(0,6)"));
  CHECK(contains(r.out, "diagonal(1,5)"));
  CHECK(contains(r.out, "residual 0"));
  CHECK(run_cli("decompose " + scn("diag-0-5.scn") + " --k 1").out == r.out);

  RunResult trunc8 = run_cli("decompose " + scn("diag-0-5.scn") + " --k 1 --trunc 8");
  CHECK(trunc8.code == 0);
  CHECK(contains(trunc8.out, "trunc = 8"));
  CHECK(contains(trunc8.out, "mu = 35"));

  // k = 0 leaves a single piece at alpha^2 - 1
  RunResult k0 = run_cli("decompose " + scn("diag-0-5.scn") + " --k 0 --json");
  CHECK(k0.code == 0);
  nlohmann::json j = nlohmann::json::parse(k0.out);
  CHECK(j["scenario"] == "diag-0-5");
  REQUIRE(j["runs"].size() == 1);
  REQUIRE(j["runs"][0]["pieces"].size() == 1);
  CHECK(j["runs"][0]["pieces"][0]["mu"] == "24");

  // the trivial line tolerates any gl2 parameter
  RunResult shifted = run_cli("decompose " + scn("trivial-rank-one-a0.scn") + " --k 1 --alpha 7/2");
  CHECK(shifted.code == 0);
  CHECK(contains(shifted.out, "alpha = 7/2"));
  CHECK(contains(shifted.out, "mu = 77/4"));
  CHECK(contains(shifted.out, "mu = 21/4"));

  // diag(0,5) does not: nabla(nabla - alpha) must land in tD
  RunResult clash = run_cli("decompose " + scn("diag-0-5.scn") + " --k 1 --alpha 2");
  CHECK(clash.code == 2);
  CHECK(contains(clash.out, "incompatible with the Sen polynomial"));
}

TEST_CASE("cli: decompose input failures") {
  fs::path bad = fs::temp_directory_path() / "phigamma-bad.scn";
  {
    std::ofstream out(bad);
    out << "label = broken\nrank = 2\ntrunc = oops\nprime = 2\n";
  }
  RunResult r = run_cli("decompose " + bad.string());
  CHECK(r.code == 2);
  CHECK(contains(r.out, "line 3"));
  CHECK(contains(r.out, "expected a non-negative integer"));
  fs::remove(bad);

  RunResult missing = run_cli("decompose /nonexistent/x.scn");
  CHECK(missing.code == 2);
  CHECK(contains(missing.out, "cannot open scenario file"));

  RunResult badk = run_cli("decompose " + scn("diag-0-5.scn") + " --k lots");
  CHECK(badk.code == 2);
}

TEST_CASE("cli: pbw") {
  RunResult cross = run_cli("pbw 'u+*u-'");
  CHECK(cross.code == 0);
  CHECK(cross.out == "u-*u+ + h\n");

  RunResult central = run_cli("pbw 'h^2-2*h+4*u+*u-' --central 1,3");
  CHECK(central.code == 0);
  CHECK(central.out == "3\n");

  RunResult torus = run_cli("pbw 'a+ - a-'");
  CHECK(torus.code == 0);
  CHECK(torus.out == "h\n");

  RunResult broken = run_cli("pbw 'h^'");
  CHECK(broken.code == 2);

  RunResult badcentral = run_cli("pbw h --central 1");
  CHECK(badcentral.code == 2);
  CHECK(contains(badcentral.out, "--central"));
}

TEST_CASE("cli: sheaf") {
  RunResult r = run_cli("sheaf --scenario " + scn("diag-0-2-etale-p3.scn") + " --level 1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "center 0"));
  CHECK(contains(r.out, "center 2"));
  CHECK(contains(r.out, "partition of unity: PASS"));
  CHECK(run_cli("sheaf --scenario " + scn("diag-0-2-etale-p3.scn") + " --level 1").out == r.out);

  RunResult deep = run_cli("sheaf --scenario " + scn("diag-0-2-etale-p3.scn") + " --level 4");
  CHECK(deep.code == 2);
  CHECK(contains(deep.out, "precision"));

  RunResult nophi = run_cli("sheaf --scenario " + scn("diag-0-5.scn") + " --level 1");
  CHECK(nophi.code == 2);
  CHECK(contains(nophi.out, "no Frobenius"));
}

TEST_CASE("cli: report directory mirroring") {
  fs::path dir = fs::temp_directory_path() / "phigamma-reports";
  fs::remove_all(dir);
  RunResult r = run_cli("verify notation", "PHIGAMMA_REPORT_DIR='" + dir.string() + "' ");
  CHECK(r.code == 0);
  std::ifstream in(dir / "verify-notation.txt");
  REQUIRE(in.good());
  std::string mirrored((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(mirrored == r.out);

  RunResult d = run_cli("decompose " + scn("diag-0-5.scn") + " --k 1 --json",
                        "PHIGAMMA_REPORT_DIR='" + dir.string() + "' ");
  CHECK(d.code == 0);
  CHECK(fs::exists(dir / "decompose-diag-0-5.json"));
  fs::remove_all(dir);
}
