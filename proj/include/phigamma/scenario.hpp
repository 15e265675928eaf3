#pragma once

// Scenario files: one module definition plus the knobs the command line
// needs (k values, alpha, alternative truncations, suite selection) in a
// line-oriented `key = value` format. Matrix entries are polynomial
// literals in t, addressed by dotted keys:
//
//   label = diag-0-2-etale-p3
//   rank = 2
//   trunc = 9
//   prime = 3
//   alpha = 2
//   k = 1 2
//   nabla.1.1 = 2
//   phi.0.0 = 1
//   phi.1.1 = 1/3
//
// Omitted matrix entries are zero; a Frobenius is attached exactly when at
// least one phi.* key appears. Blank lines and lines starting with '#' are
// ignored. Every diagnostic carries the 1-based line it came from, and
// emit/parse round-trip to an equal scenario.

#include <phigamma/detail/parse_poly.hpp>
#include <phigamma/pgmod.hpp>

#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phigamma {

struct ScenarioError : std::runtime_error {
  std::size_t line;  // 0 when the error is not tied to a single line

  ScenarioError(std::size_t line_, const std::string& msg)
      : std::runtime_error(line_ ? "line " + std::to_string(line_) + ": " + msg : msg),
        line(line_) {}
};

struct Scenario {
  std::string label;
  std::size_t rank = 0;
  std::size_t trunc = 0;
  long prime = 2;
  Rational alpha{0};
  std::optional<SeriesMat> nabla;  // engaged after a successful parse
  std::optional<SeriesMat> phi;
  std::vector<unsigned> ks;
  std::vector<std::size_t> truncs;
  std::vector<std::string> suites;

  bool operator==(const Scenario& o) const {
    return label == o.label && rank == o.rank && trunc == o.trunc && prime == o.prime &&
           alpha == o.alpha && nabla == o.nabla && phi == o.phi && ks == o.ks &&
           truncs == o.truncs && suites == o.suites;
  }

  // Materialize the torsion module, optionally at another truncation or
  // alpha. Widening keeps the polynomial entries on the nose: the stored
  // coefficients are the definition, not an approximation.
  TorsionModule module(std::optional<std::size_t> trunc_override = std::nullopt,
                       std::optional<Rational> alpha_override = std::nullopt) const {
    if (!nabla) throw std::logic_error("Scenario: no connection matrix");
    std::size_t n = trunc_override.value_or(trunc);
    auto resized = [&](const SeriesMat& m) {
      SeriesMat r(rank, rank, Coord::T, n);
      for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < rank; ++j) {
          const TruncSeries& e = m.at(i, j);
          r.at(i, j) = n <= e.trunc() ? e.truncated(n) : e.lifted_to(n);
        }
      return r;
    };
    TorsionModule d{.rank = rank,
                    .trunc = n,
                    .prime = prime,
                    .alpha = alpha_override.value_or(alpha),
                    .nabla_mat = resized(*nabla),
                    .phi_mat = std::nullopt,
                    .label = label};
    if (phi) d = with_phi(std::move(d), resized(*phi));
    return d;
  }
};

namespace scenario_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline unsigned long parse_uint(std::size_t line, const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ScenarioError(line, "key '" + key + "': expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoul(v);
  } catch (const std::out_of_range&) {
    throw ScenarioError(line, "key '" + key + "': integer literal too large");
  }
}

struct RawEntry {
  std::size_t line = 0;
  std::string value;
};

}  // namespace scenario_detail

inline Scenario parse_scenario(std::istream& in) {
  using scenario_detail::RawEntry;
  std::map<std::string, RawEntry> raw;
  std::vector<std::pair<std::string, RawEntry>> matrix_keys;  // file order
  std::vector<std::string> suite_order;
  std::string linebuf;
  std::size_t lineno = 0;
  while (std::getline(in, linebuf)) {
    ++lineno;
    std::string s = scenario_detail::trim(linebuf);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ScenarioError(lineno, "expected 'key = value', got '" + s + "'");
    std::string key = scenario_detail::trim(s.substr(0, eq));
    std::string value = scenario_detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ScenarioError(lineno, "missing key before '='");
    if (value.empty()) throw ScenarioError(lineno, "key '" + key + "' has an empty value");
    bool matrix = key.rfind("nabla.", 0) == 0 || key.rfind("phi.", 0) == 0;
    auto& dest = matrix ? matrix_keys.emplace_back(key, RawEntry{}).second
                        : raw.emplace(key, RawEntry{}).first->second;
    if (!matrix && dest.line)
      throw ScenarioError(lineno, "duplicate key '" + key + "' (first on line " +
                                      std::to_string(dest.line) + ")");
    dest = {lineno, value};
  }

  auto take = [&](const char* key) -> std::optional<RawEntry> {
    auto it = raw.find(key);
    if (it == raw.end()) return std::nullopt;
    RawEntry e = it->second;
    raw.erase(it);
    return e;
  };
  auto require = [&](const char* key) {
    auto e = take(key);
    if (!e) throw ScenarioError(0, "missing required key '" + std::string(key) + "'");
    return *e;
  };

  Scenario sc;
  RawEntry e = require("label");
  sc.label = e.value;
  e = require("rank");
  sc.rank = scenario_detail::parse_uint(e.line, "rank", e.value);
  if (sc.rank == 0) throw ScenarioError(e.line, "rank must be positive");
  e = require("trunc");
  sc.trunc = scenario_detail::parse_uint(e.line, "trunc", e.value);
  if (sc.trunc == 0) throw ScenarioError(e.line, "trunc must be positive");
  e = require("prime");
  sc.prime = static_cast<long>(scenario_detail::parse_uint(e.line, "prime", e.value));
  if (sc.prime < 2) throw ScenarioError(e.line, "prime must be at least 2");

  if (auto a = take("alpha")) {
    try {
      sc.alpha = parse_rational(a->value);
    } catch (const std::invalid_argument& ex) {
      throw ScenarioError(a->line, "key 'alpha': " + std::string(ex.what()));
    }
  }
  if (auto k = take("k"))
    for (const std::string& tok : scenario_detail::split_ws(k->value))
      sc.ks.push_back(static_cast<unsigned>(scenario_detail::parse_uint(k->line, "k", tok)));
  if (auto t = take("truncs"))
    for (const std::string& tok : scenario_detail::split_ws(t->value)) {
      std::size_t n = scenario_detail::parse_uint(t->line, "truncs", tok);
      if (n == 0) throw ScenarioError(t->line, "truncs entries must be positive");
      sc.truncs.push_back(n);
    }
  if (auto s = take("suites")) sc.suites = scenario_detail::split_ws(s->value);

  if (!raw.empty()) {
    const auto& [key, entry] = *raw.begin();
    throw ScenarioError(entry.line, "unknown key '" + key + "'");
  }

  sc.nabla = SeriesMat(sc.rank, sc.rank, Coord::T, sc.trunc);
  std::map<std::string, std::size_t> seen;
  for (const auto& [key, entry] : matrix_keys) {
    std::size_t d1 = key.find('.'), d2 = key.find('.', d1 + 1);
    if (d2 == std::string::npos || key.find('.', d2 + 1) != std::string::npos)
      throw ScenarioError(entry.line, "matrix key '" + key + "' must look like nabla.<row>.<col>");
    std::string base = key.substr(0, d1);
    std::size_t i = scenario_detail::parse_uint(entry.line, key, key.substr(d1 + 1, d2 - d1 - 1));
    std::size_t j = scenario_detail::parse_uint(entry.line, key, key.substr(d2 + 1));
    if (i >= sc.rank || j >= sc.rank)
      throw ScenarioError(entry.line, "key '" + key + "': index out of range for rank " +
                                          std::to_string(sc.rank));
    if (auto [it, fresh] = seen.emplace(key, entry.line); !fresh)
      throw ScenarioError(entry.line, "duplicate key '" + key + "' (first on line " +
                                          std::to_string(it->second) + ")");
    if (base == "phi" && !sc.phi) sc.phi = SeriesMat(sc.rank, sc.rank, Coord::T, sc.trunc);
    try {
      (base == "phi" ? *sc.phi : *sc.nabla).at(i, j) =
          parse_poly(entry.value, Coord::T, sc.trunc);
    } catch (const ParseError& ex) {
      throw ScenarioError(entry.line, "key '" + key + "': " + ex.what());
    }
  }
  return sc;
}

inline Scenario parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "cannot open scenario file '" + path + "'");
  try {
    return parse_scenario(in);
  } catch (const ScenarioError& e) {
    throw ScenarioError(e.line, path + ": " + e.what());
  }
}

inline std::string emit_scenario(const Scenario& sc) {
  if (!sc.nabla) throw std::logic_error("emit_scenario: no connection matrix");
  std::ostringstream out;
  out << "label = " << sc.label << "\n";
  out << "rank = " << sc.rank << "\n";
  out << "trunc = " << sc.trunc << "\n";
  out << "prime = " << sc.prime << "\n";
  out << "alpha = " << to_string(sc.alpha) << "\n";
  auto list = [&](const char* key, const auto& xs) {
    if (xs.empty()) return;
    out << key << " =";
    for (const auto& x : xs) out << " " << x;
    out << "\n";
  };
  list("k", sc.ks);
  list("truncs", sc.truncs);
  list("suites", sc.suites);
  auto matrix = [&](const char* name, const SeriesMat& m) {
    bool any = false;
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m.at(i, j).is_zero()) continue;
        out << name << "." << i << "." << j << " = " << m.at(i, j).to_string() << "\n";
        any = true;
      }
    return any;
  };
  matrix("nabla", *sc.nabla);
  if (sc.phi && !matrix("phi", *sc.phi))
    out << "phi.0.0 = 0\n";  // keep an all-zero Frobenius present through a round trip
  return out.str();
}

}  // namespace phigamma
