#pragma once

// Parser for U(gl2) expressions like "h^2 - 2*h + 4*u+*u-" or
// "(a+ - 3)*(a+ + 1)^2". Generators: u+, u-, a+, a-, h, z.

#include <phigamma/detail/parse_error.hpp>
#include <phigamma/ugl2.hpp>

#include <cctype>
#include <string>

namespace phigamma::detail {

class UeaParser {
 public:
  explicit UeaParser(const std::string& src) : s_(src) {}

  UEAElement run() {
    skip_ws();
    if (eof()) throw ParseError("empty expression", 0);
    UEAElement e = parse_expr();
    skip_ws();
    if (!eof()) throw ParseError("unexpected trailing input", i_);
    return e;
  }

 private:
  bool eof() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  UEAElement parse_expr() {
    skip_ws();
    bool neg = false;
    if (!eof() && (s_[i_] == '+' || s_[i_] == '-')) {
      neg = s_[i_] == '-';
      ++i_;
    }
    UEAElement e = parse_term();
    if (neg) e = uea_scale(std::move(e), Rational(-1));
    skip_ws();
    while (!eof() && (s_[i_] == '+' || s_[i_] == '-')) {
      bool sub = s_[i_] == '-';
      ++i_;
      UEAElement t = parse_term();
      e = sub ? uea_sub(std::move(e), t) : uea_add(std::move(e), t);
      skip_ws();
    }
    return e;
  }

  UEAElement parse_term() {
    UEAElement e = parse_factor();
    skip_ws();
    while (!eof() && s_[i_] == '*') {
      ++i_;
      e = uea_mul(e, parse_factor());
      skip_ws();
    }
    return e;
  }

  UEAElement parse_factor() {
    UEAElement base = parse_primary();
    skip_ws();
    if (!eof() && s_[i_] == '^') {
      ++i_;
      skip_ws();
      std::size_t at = i_;
      long d = parse_integer();
      if (d < 0) throw ParseError("negative exponent", at);
      return uea_pow(base, static_cast<unsigned>(d));
    }
    return base;
  }

  UEAElement parse_primary() {
    skip_ws();
    if (eof()) throw ParseError("expected an operand", i_);
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      UEAElement e = parse_expr();
      skip_ws();
      if (eof() || s_[i_] != ')') throw ParseError("missing ')'", i_);
      ++i_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return uea_scalar(parse_coef());
    if (c == 'u' || c == 'a') {
      std::size_t at = i_;
      ++i_;
      if (eof() || (s_[i_] != '+' && s_[i_] != '-'))
        throw ParseError(std::string("'") + c + "' must be followed by '+' or '-'", at);
      bool plus = s_[i_] == '+';
      ++i_;
      if (c == 'u') return plus ? uea_up() : uea_um();
      return plus ? uea_aplus() : uea_aminus();
    }
    if (c == 'h') {
      ++i_;
      return uea_h();
    }
    if (c == 'z') {
      ++i_;
      return uea_z();
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i_);
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

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace phigamma::detail

namespace phigamma {

inline UEAElement parse_uea(const std::string& src) { return detail::UeaParser(src).run(); }

}  // namespace phigamma
