#pragma once

// Truncated power series over Q in the two coordinates used everywhere:
// t (the logarithm coordinate) and X, related by t = log(1+X), X = e^t - 1.
// A TruncSeries is an element of Q[v]/v^N together with its truncation N;
// precision bookkeeping follows the rules:
//   - add/mul/compose: result precision = min of the inputs,
//   - divide_by_var: loses exactly one degree,
//   - psi_coeff: divides precision by p (floor).
// phi, gamma and nabla are diagonal in the t-coordinate, which is why t is
// the canonical one; X versions are conjugates through the coordinate change.

#include <phigamma/qmatrix.hpp>
#include <phigamma/rational.hpp>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phigamma {

enum class Coord { T, X };

inline char coord_char(Coord c) { return c == Coord::T ? 't' : 'X'; }

// ---- plain polynomial helpers (coefficient vectors, no truncation) ----

inline std::vector<Rational> poly_trim(std::vector<Rational> p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

inline std::vector<Rational> poly_mul(const std::vector<Rational>& a,
                                      const std::vector<Rational>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Rational> r(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (b[j] != 0) r[i + j] += a[i] * b[j];
  }
  return r;
}

inline std::vector<Rational> poly_add(std::vector<Rational> a,
                                      const std::vector<Rational>& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rational(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

// (1+X)^e for e >= 0.
inline std::vector<Rational> poly_onepx_pow(unsigned long e) {
  std::vector<Rational> r(e + 1);
  for (unsigned long j = 0; j <= e; ++j) r[j] = binom(Rational(static_cast<long>(e)), j);
  return r;
}

// Exact decomposition f = sum_{i<p} (1+X)^i f_i((1+X)^p - 1) of a polynomial.
// Unique over Q; returns the p parts. This is the engine behind psi and the
// ball-restriction operators: it must be fed honest polynomials (canonical
// lifts), never re-truncated intermediates, or low-degree garbage appears.
inline std::vector<std::vector<Rational>> psi_parts(const std::vector<Rational>& f, long p) {
  if (p < 2) throw std::invalid_argument("psi_parts: p must be at least 2");
  auto ft = poly_trim(f);
  std::size_t P = static_cast<std::size_t>(p);
  if (ft.empty()) return std::vector<std::vector<Rational>>(P);
  std::size_t M = (ft.size() - 1) / P + 1;  // parts live in degrees < M
  std::size_t dim = P * M;                  // target degrees < P*M cover deg(f)
  // column (i*M + m) = coefficients of (1+X)^i * ((1+X)^p - 1)^m
  std::vector<Rational> phiXm{Rational(1)};  // ((1+X)^p - 1)^m, m = 0
  std::vector<Rational> phiX = poly_onepx_pow(P);
  phiX[0] -= 1;
  QMat sys(dim, dim);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < P; ++i) {
      auto colpoly = poly_mul(poly_onepx_pow(i), phiXm);
      for (std::size_t j = 0; j < dim && j < colpoly.size(); ++j)
        sys.at(j, i * M + m) = colpoly[j];
    }
    if (m + 1 < M) phiXm = poly_mul(phiXm, phiX);
  }
  QMat rhs(dim, 1);
  for (std::size_t j = 0; j < ft.size(); ++j) rhs.at(j, 0) = ft[j];
  auto sol = sys.solve(rhs);
  if (!sol || !sys.is_invertible())
    throw std::logic_error("psi_parts: decomposition system unexpectedly singular");
  std::vector<std::vector<Rational>> parts(P);
  for (std::size_t i = 0; i < P; ++i) {
    parts[i].resize(M);
    for (std::size_t m = 0; m < M; ++m) parts[i][m] = sol->at(i * M + m, 0);
  }
  return parts;
}

// ---- the truncated series type ----

class TruncSeries {
 public:
  TruncSeries(Coord coord, std::size_t trunc) : coord_(coord), trunc_(trunc) {
    if (trunc == 0) throw std::invalid_argument("TruncSeries: truncation must be positive");
    c_.assign(trunc, Rational(0));
  }

  static TruncSeries zero(Coord coord, std::size_t trunc) { return TruncSeries(coord, trunc); }

  static TruncSeries constant(Coord coord, std::size_t trunc, const Rational& v) {
    TruncSeries s(coord, trunc);
    s.c_[0] = v;
    return s;
  }

  static TruncSeries one(Coord coord, std::size_t trunc) {
    return constant(coord, trunc, Rational(1));
  }

  static TruncSeries var(Coord coord, std::size_t trunc) {
    TruncSeries s(coord, trunc);
    if (trunc >= 2) s.c_[1] = 1;
    return s;
  }

  static TruncSeries from_coeffs(Coord coord, std::vector<Rational> coeffs, std::size_t trunc) {
    TruncSeries s(coord, trunc);
    for (std::size_t i = 0; i < trunc && i < coeffs.size(); ++i) s.c_[i] = std::move(coeffs[i]);
    return s;
  }

  Coord coord() const { return coord_; }
  std::size_t trunc() const { return trunc_; }
  const std::vector<Rational>& coeffs() const { return c_; }
  const Rational& operator[](std::size_t i) const { return c_.at(i); }
  Rational& coeff(std::size_t i) { return c_.at(i); }

  bool is_zero() const {
    for (const auto& x : c_)
      if (x != 0) return false;
    return true;
  }
  bool is_unit() const { return c_[0] != 0; }

  bool operator==(const TruncSeries& o) const {
    return coord_ == o.coord_ && trunc_ == o.trunc_ && c_ == o.c_;
  }
  bool operator!=(const TruncSeries& o) const { return !(*this == o); }

  // equality of the underlying ring elements at the shared precision
  friend bool equal_upto_min(const TruncSeries& a, const TruncSeries& b) {
    if (a.coord_ != b.coord_) return false;
    std::size_t m = std::min(a.trunc_, b.trunc_);
    for (std::size_t i = 0; i < m; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  TruncSeries truncated(std::size_t m) const {
    if (m > trunc_) throw std::invalid_argument("truncated: cannot gain precision");
    return from_coeffs(coord_, std::vector<Rational>(c_.begin(), c_.begin() + m), m);
  }

  // Canonical polynomial lift, re-tagged at higher truncation. Only sensible
  // where the caller really means the polynomial representative (sheaf ops).
  TruncSeries lifted_to(std::size_t m) const {
    if (m < trunc_) return truncated(m);
    return from_coeffs(coord_, c_, m);
  }

  TruncSeries operator+(const TruncSeries& o) const {
    auto [a, b] = aligned(o);
    for (std::size_t i = 0; i < a.trunc_; ++i) a.c_[i] += b.c_[i];
    return a;
  }

  TruncSeries operator-(const TruncSeries& o) const {
    auto [a, b] = aligned(o);
    for (std::size_t i = 0; i < a.trunc_; ++i) a.c_[i] -= b.c_[i];
    return a;
  }

  TruncSeries operator-() const {
    TruncSeries r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }

  TruncSeries operator*(const TruncSeries& o) const {
    auto [a, b] = aligned(o);
    TruncSeries r(a.coord_, a.trunc_);
    for (std::size_t i = 0; i < a.trunc_; ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; i + j < a.trunc_; ++j)
        if (b.c_[j] != 0) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }

  TruncSeries operator*(const Rational& s) const {
    TruncSeries r = *this;
    for (auto& x : r.c_) x *= s;
    return r;
  }
  friend TruncSeries operator*(const Rational& s, const TruncSeries& f) { return f * s; }

  TruncSeries pow(std::size_t e) const {
    TruncSeries acc = one(coord_, trunc_), base = *this;
    while (e) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  // f(g) for g with zero constant term; result lives in g's coordinate.
  TruncSeries compose(const TruncSeries& g) const {
    if (g.c_[0] != 0) throw std::invalid_argument("compose: inner series must vanish at 0");
    std::size_t m = std::min(trunc_, g.trunc_);
    TruncSeries acc(g.coord_, m);
    TruncSeries gg = g.truncated(m);
    for (std::size_t i = trunc_; i-- > 0;) {
      acc = acc * gg;
      acc.c_[0] += c_[i];
    }
    return acc;
  }

  TruncSeries invert() const {
    if (c_[0] == 0) throw std::domain_error("invert: not a unit (zero constant term)");
    TruncSeries r(coord_, trunc_);
    Rational lead = Rational(1) / c_[0];
    r.c_[0] = lead;
    for (std::size_t n = 1; n < trunc_; ++n) {
      Rational s(0);
      for (std::size_t k = 1; k <= n; ++k) s += c_[k] * r.c_[n - k];
      r.c_[n] = -lead * s;
    }
    return r;
  }

  // f/v for f with zero constant term; precision drops by one.
  TruncSeries divide_by_var() const {
    if (c_[0] != 0) throw std::domain_error("divide_by_var: constant term nonzero");
    if (trunc_ < 2) throw std::domain_error("divide_by_var: no precision left");
    return from_coeffs(coord_, std::vector<Rational>(c_.begin() + 1, c_.end()), trunc_ - 1);
  }

  TruncSeries shift_up() const {  // multiply by the variable
    std::vector<Rational> v(trunc_, Rational(0));
    for (std::size_t i = 1; i < trunc_; ++i) v[i] = c_[i - 1];
    return from_coeffs(coord_, std::move(v), trunc_);
  }

  // nabla = t d/dt. Diagonal in t; conjugated through t = log(1+X) in X,
  // where it becomes log(1+X)*(1+X)*d/dX (exact at full precision: the
  // unknown top coefficient of the derivative is shifted out by the
  // valuation-1 prefactor).
  TruncSeries nabla() const {
    if (coord_ == Coord::T) {
      TruncSeries r = *this;
      for (std::size_t i = 0; i < trunc_; ++i) r.c_[i] *= Rational(static_cast<long>(i));
      return r;
    }
    TruncSeries d(Coord::X, trunc_);
    for (std::size_t i = 1; i < trunc_; ++i)
      d.c_[i - 1] = c_[i] * Rational(static_cast<long>(i));
    TruncSeries onepx = var(Coord::X, trunc_);
    onepx.c_[0] = 1;
    return log_onepx(trunc_) * onepx * d;
  }

  // phi: t -> p*t, i.e. X -> (1+X)^p - 1.
  TruncSeries phi(long p) const {
    if (coord_ == Coord::T) {
      TruncSeries r = *this;
      Rational scale(1);
      for (std::size_t i = 0; i < trunc_; ++i) {
        r.c_[i] *= scale;
        scale *= p;
      }
      return r;
    }
    return compose_onepx_pow(Rational(p));
  }

  // Exact phi of the canonical polynomial lift, reported at truncation p*N
  // (no information is lost: the lift has degree < N, its image degree < p*N).
  // psi of the result recovers the lift exactly; this is the composition the
  // psi/phi laws hold through at torsion level, since truncating phi's output
  // back to N would feed psi a different polynomial and poison low degrees.
  TruncSeries phi_lift(long p) const {
    if (coord_ != Coord::X)
      throw std::invalid_argument("phi_lift: X-coordinate input required");
    return lifted_to(trunc_ * static_cast<std::size_t>(p)).phi(p);
  }

  // gamma_a: t -> a*t for a rational unit.
  TruncSeries gamma(const Rational& a) const {
    if (a == 0) throw std::invalid_argument("gamma: a must be a unit");
    if (coord_ == Coord::T) {
      TruncSeries r = *this;
      Rational scale(1);
      for (std::size_t i = 0; i < trunc_; ++i) {
        r.c_[i] *= scale;
        scale *= a;
      }
      return r;
    }
    return compose_onepx_pow(a);
  }

  TruncSeries to_X() const {  // substitute t = log(1+X)
    if (coord_ == Coord::X) return *this;
    return compose(log_onepx(trunc_));
  }

  TruncSeries to_t() const {  // substitute X = e^t - 1
    if (coord_ == Coord::T) return *this;
    return compose(expm1_t(trunc_));
  }

  // psi: the 0-th part of f = sum_{i<p} (1+X)^i phi(f_i), solved on the
  // canonical lift truncated at p*floor(N/p); output precision floor(N/p).
  TruncSeries psi(long p) const {
    if (coord_ != Coord::X) throw std::invalid_argument("psi: X-coordinate input required");
    if (trunc_ < static_cast<std::size_t>(p))
      throw std::invalid_argument("psi: truncation below p");
    std::size_t M = trunc_ / static_cast<std::size_t>(p);
    std::vector<Rational> lift(c_.begin(), c_.begin() + M * static_cast<std::size_t>(p));
    auto parts = psi_parts(lift, p);
    return from_coeffs(Coord::X, parts[0], M);
  }

  // N x N matrix of "multiply by this" acting on Q[v]/v^N.
  QMat mult_matrix() const {
    QMat m(trunc_, trunc_);
    for (std::size_t i = 0; i < trunc_; ++i)
      for (std::size_t j = 0; j <= i; ++j) m.at(i, j) = c_[i - j];
    return m;
  }

  std::string to_string() const {
    std::string out;
    char v = coord_char(coord_);
    for (std::size_t i = 0; i < trunc_; ++i) {
      if (c_[i] == 0) continue;
      Rational a = c_[i];
      bool neg = a < 0;
      if (out.empty()) {
        if (neg) out += "-";
      } else {
        out += neg ? " - " : " + ";
      }
      Rational mag = neg ? Rational(-a) : a;
      std::string ms = phigamma::to_string(mag);
      if (i == 0) {
        out += ms;
      } else {
        if (mag != 1) out += ms + "*";
        out += v;
        if (i > 1) out += "^" + std::to_string(i);
      }
    }
    if (out.empty()) out = "0";
    return out;
  }

  // ---- stock series ----

  static TruncSeries log_onepx(std::size_t trunc) {  // log(1+X) as an X-series
    TruncSeries s(Coord::X, trunc);
    for (std::size_t m = 1; m < trunc; ++m)
      s.c_[m] = Rational(m % 2 == 1 ? 1 : -1, static_cast<long>(m));
    return s;
  }

  static TruncSeries expm1_t(std::size_t trunc) {  // e^t - 1 as a t-series
    TruncSeries s(Coord::T, trunc);
    Rational f(1);
    for (std::size_t m = 1; m < trunc; ++m) {
      f /= Rational(static_cast<long>(m));
      s.c_[m] = f;
    }
    return s;
  }

 private:
  // f((1+X)^a - 1) for rational a, via generalized binomials; equals the
  // gamma/phi substitution in the X-coordinate.
  TruncSeries compose_onepx_pow(const Rational& a) const {
    TruncSeries inner(Coord::X, trunc_);
    for (std::size_t m = 1; m < trunc_; ++m) inner.c_[m] = binom(a, m);
    return compose(inner);
  }

  std::pair<TruncSeries, TruncSeries> aligned(const TruncSeries& o) const {
    if (coord_ != o.coord_)
      throw std::invalid_argument("TruncSeries: coordinate mismatch");
    std::size_t m = std::min(trunc_, o.trunc_);
    return {truncated(m), o.truncated(m)};
  }

  Coord coord_;
  std::size_t trunc_;
  std::vector<Rational> c_;
};

// Parse "1 - 1/2*t + 3*t^2" style polynomial literals into a series.
TruncSeries parse_poly(const std::string& src, Coord coord, std::size_t trunc);

}  // namespace phigamma

#include <phigamma/detail/parse_poly.hpp>
