#pragma once

// Parser for polynomial literals like "1 - 1/2*t + 3*t^2" (or in X).
// Errors carry the character position to make scenario-file diagnostics useful.

#include <phigamma/detail/parse_error.hpp>
#include <phigamma/series.hpp>

#include <cctype>
#include <string>

namespace phigamma {

namespace detail {

class PolyParser {
 public:
  PolyParser(const std::string& src, Coord coord, std::size_t trunc)
      : s_(src), coord_(coord), out_(TruncSeries::zero(coord, trunc)) {}

  TruncSeries run() {
    skip_ws();
    if (eof()) throw ParseError("empty polynomial literal", 0);
    bool negative = eat_sign();
    parse_term(negative);
    skip_ws();
    while (!eof()) {
      std::size_t at = i_;
      char c = s_[i_];
      if (c != '+' && c != '-') throw ParseError("expected '+' or '-'", at);
      ++i_;
      skip_ws();
      parse_term(c == '-');
      skip_ws();
    }
    return out_;
  }

 private:
  bool eof() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat_sign() {
    if (!eof() && (s_[i_] == '+' || s_[i_] == '-')) {
      bool neg = s_[i_] == '-';
      ++i_;
      skip_ws();
      return neg;
    }
    return false;
  }

  long parse_integer() {
    std::size_t at = i_;
    std::string digits;
    while (!eof() && std::isdigit(static_cast<unsigned char>(s_[i_]))) digits += s_[i_++];
    if (digits.empty()) throw ParseError("expected a number", at);
    try {
      return std::stol(digits);
    } catch (const std::out_of_range&) {
      throw ParseError("integer literal too large", at);
    }
  }

  Rational parse_coef() {
    long num = parse_integer();
    skip_ws();
    if (!eof() && s_[i_] == '/') {
      ++i_;
      skip_ws();
      std::size_t at = i_;
      long den = parse_integer();
      if (den == 0) throw ParseError("zero denominator", at);
      return rat(num, den);
    }
    return rat(num);
  }

  void parse_term(bool negative) {
    skip_ws();
    if (eof()) throw ParseError("dangling sign", i_);
    Rational coef(1);
    bool saw_coef = false;
    if (std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      coef = parse_coef();
      saw_coef = true;
      skip_ws();
      if (!eof() && s_[i_] == '*') {
        ++i_;
        skip_ws();
      } else {
        add_monomial(negative ? Rational(-coef) : coef, 0);
        return;
      }
    }
    std::size_t at = i_;
    if (eof()) throw ParseError("expected a variable after '*'", at);
    char v = s_[i_];
    if (v != coord_char(coord_)) {
      if (v == 't' || v == 'X')
        throw ParseError(std::string("variable '") + v + "' does not match coordinate '" +
                             coord_char(coord_) + "'",
                         at);
      if (saw_coef) throw ParseError("expected a variable after '*'", at);
      throw ParseError("expected a term", at);
    }
    ++i_;
    std::size_t deg = 1;
    skip_ws();
    if (!eof() && s_[i_] == '^') {
      ++i_;
      skip_ws();
      std::size_t dat = i_;
      long d = parse_integer();
      if (d < 0) throw ParseError("negative exponent", dat);
      deg = static_cast<std::size_t>(d);
    }
    add_monomial(negative ? Rational(-coef) : coef, deg);
  }

  void add_monomial(const Rational& coef, std::size_t deg) {
    if (deg >= out_.trunc())
      throw ParseError("degree " + std::to_string(deg) + " exceeds truncation " +
                           std::to_string(out_.trunc()),
                       i_);
    out_.coeff(deg) += coef;
  }

  const std::string& s_;
  std::size_t i_ = 0;
  Coord coord_;
  TruncSeries out_;
};

}  // namespace detail

inline TruncSeries parse_poly(const std::string& src, Coord coord, std::size_t trunc) {
  return detail::PolyParser(src, coord, trunc).run();
}

}  // namespace phigamma
