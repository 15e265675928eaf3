#include <phigamma/series.hpp>
#include <phigamma/symk.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace phigamma;

namespace {

struct SymGen {
  std::mt19937 rng{777u};

  Rational rational(bool nonzero = false) {
    std::uniform_int_distribution<int> num(-5, 5), den(1, 3);
    for (;;) {
      Rational r = rat(num(rng), den(rng));
      if (!nonzero || r != 0) return r;
    }
  }

  GL2Elem upper() {
    return {rational(true), rational(), Rational(0), rational(true)};
  }

  QMat vec(std::size_t n) {
    QMat v(n, 1);
    for (std::size_t i = 0; i < n; ++i) v.at(i, 0) = rational();
    return v;
  }
};

// Independent oracle: Sym^k(g) in the monomial basis f1^i f2^{k-i} by direct
// binomial expansion of (a f1 + c f2)^i (b f1 + d f2)^{k-i}, conjugated into
// the e-basis by e_i = k!/(k-i)! f1^i f2^{k-i}.
QMat symk_matrix_oracle(unsigned k, const GL2Elem& g) {
  QMat mono(k + 1, k + 1);
  for (unsigned i = 0; i <= k; ++i) {
    for (unsigned r = 0; r <= i; ++r) {
      for (unsigned s = 0; s <= k - i; ++s) {
        Rational coef = binom(Rational(static_cast<long>(i)), r) *
                        binom(Rational(static_cast<long>(k - i)), s) * rpow(g.a, r) *
                        rpow(g.c, i - r) * rpow(g.b, s) * rpow(g.d, k - i - s);
        mono.at(r + s, i) += coef;  // lands on f1^{r+s} f2^{k-r-s}
      }
    }
  }
  QMat conj(k + 1, k + 1);
  for (unsigned i = 0; i <= k; ++i) {
    for (unsigned j = 0; j <= k; ++j)
      conj.at(i, j) = mono.at(i, j) * (factorial(k - i) / factorial(k - j));
  }
  return conj;
}

}  // namespace

TEST_CASE("small symmetric powers match hand matrices") {
  SymPower v0 = make_symk(0);
  CHECK(v0.h == QMat(1, 1));
  CHECK(v0.up == QMat(1, 1));
  CHECK(v0.um == QMat(1, 1));
  CHECK(v0.z == QMat(1, 1));

  SymPower v1 = make_symk(1);
  QMat up(2, 2), um(2, 2), h(2, 2);
  up.at(1, 0) = 1;
  um.at(0, 1) = 1;
  h.at(0, 0) = -1;
  h.at(1, 1) = 1;
  CHECK(v1.up == up);
  CHECK(v1.um == um);
  CHECK(v1.h == h);
  CHECK(v1.z == QMat::identity(2));
}

TEST_CASE("X action is nilpotent of exact order k+1") {
  for (unsigned k = 0; k <= 5; ++k) {
    SymPower v = make_symk(k);
    CHECK(v.X.pow(k + 1) == QMat(k + 1, k + 1));
    if (k > 0) CHECK(v.X.pow(k) != QMat(k + 1, k + 1));
    // filtration X^i V_k has dimension k+1-i
    for (unsigned i = 0; i <= k + 1; ++i)
      CHECK(v.X.pow(i).rank() == (k + 1) - i);
    // 1 + X is the unipotent group element
    CHECK(QMat::identity(k + 1) + v.X ==
          v.group_matrix({Rational(1), Rational(1), Rational(0), Rational(1)}));
  }
}

TEST_CASE("coefficient ring mod X^{k+1} maps onto V_k") {
  // alpha |-> alpha.e sends X^j to X^j e0; the resulting basis change
  // intertwines multiplication by X with the X matrix
  for (unsigned k = 1; k <= 4; ++k) {
    SymPower v = make_symk(k);
    QMat basis(k + 1, k + 1);
    QMat e0 = QMat::col_vector(std::vector<Rational>(k + 1));
    e0.at(0, 0) = 1;
    for (unsigned j = 0; j <= k; ++j) {
      QMat col = v.X.pow(j) * e0;
      for (unsigned r = 0; r <= k; ++r) basis.at(r, j) = col.at(r, 0);
    }
    REQUIRE(basis.is_invertible());
    QMat mult_x = TruncSeries::var(Coord::X, k + 1).mult_matrix();
    CHECK(v.X * basis == basis * mult_x);

    // nabla transports to t d/dt on the ring side
    SymGen gen;
    std::vector<Rational> coeffs(k + 1);
    for (auto& c : coeffs) c = gen.rational();
    TruncSeries f = TruncSeries::from_coeffs(Coord::X, coeffs, k + 1);
    QMat lhs = v.nabla() * (basis * QMat::col_vector(coeffs));
    QMat rhs = basis * QMat::col_vector(f.nabla().coeffs());
    CHECK(lhs == rhs);
  }
}

TEST_CASE("group action in the e basis") {
  SymGen gen;

  SECTION("matches the monomial-basis oracle") {
    for (unsigned k = 0; k <= 5; ++k) {
      SymPower v = make_symk(k);
      for (int trial = 0; trial < 4; ++trial) {
        GL2Elem g = gen.upper();
        CHECK(v.group_matrix(g) == symk_matrix_oracle(k, g));
      }
    }
  }

  SECTION("multiplicative in the group") {
    SymPower v = make_symk(4);
    for (int trial = 0; trial < 6; ++trial) {
      GL2Elem g = gen.upper(), g2 = gen.upper();
      CHECK(v.group_matrix(g * g2) == v.group_matrix(g) * v.group_matrix(g2));
    }
  }

  SECTION("diagonal elements scale e_i by a^i") {
    SymPower v = make_symk(3);
    Rational a = rat(5, 2);
    QMat m = v.group_matrix({a, Rational(0), Rational(0), Rational(1)});
    for (unsigned i = 0; i <= 3; ++i)
      for (unsigned j = 0; j <= 3; ++j)
        CHECK(m.at(i, j) == (i == j ? rpow(a, i) : Rational(0)));
  }

  SECTION("rejects lower-triangular and singular input") {
    SymPower v = make_symk(2);
    CHECK_THROWS_AS(v.group_matrix({Rational(1), Rational(0), Rational(1), Rational(1)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(v.group_matrix({Rational(0), Rational(1), Rational(0), Rational(1)}),
                    std::invalid_argument);
  }
}

TEST_CASE("phi and its inverse") {
  SymGen gen;
  Rational p(3);
  for (unsigned k = 1; k <= 4; ++k) {
    SymPower v = make_symk(k);
    QMat phi = v.phi_matrix(p);

    // e is fixed, e_i scales by p^i
    QMat e0(k + 1, 1);
    e0.at(0, 0) = 1;
    CHECK(phi * e0 == e0);
    CHECK(v.phi_inverse(e0, p) == e0);
    for (unsigned i = 0; i <= k; ++i) CHECK(phi.at(i, i) == rpow(p, i));

    QMat w = gen.vec(k + 1);
    CHECK(v.phi_inverse(phi * w, p) == w);
    CHECK(phi * v.phi_inverse(w, p) == w);
  }
}
