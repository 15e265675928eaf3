#include <catch2/catch_amalgamated.hpp>

#include <phigamma/series.hpp>

#include <random>

using namespace phigamma;

namespace {

TruncSeries random_series(Coord c, std::size_t trunc, std::mt19937& rng, bool unit = false) {
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 4);
  std::vector<Rational> v(trunc);
  for (auto& x : v) x = rat(num(rng), den(rng));
  if (unit && v[0] == 0) v[0] = 1;
  return TruncSeries::from_coeffs(c, v, trunc);
}

}  // namespace

TEST_CASE("coordinate change: Maclaurin expansions and round trip") {
  TruncSeries t4 = TruncSeries::var(Coord::T, 4);
  TruncSeries lg = t4.to_X();  // log(1+X) mod X^4
  CHECK(lg == TruncSeries::from_coeffs(Coord::X,
                                       {rat(0), rat(1), rat(-1, 2), rat(1, 3)}, 4));

  TruncSeries x3 = TruncSeries::var(Coord::X, 3);
  CHECK(x3.to_t() ==
        TruncSeries::from_coeffs(Coord::T, {rat(0), rat(1), rat(1, 2)}, 3));

  std::mt19937 rng(42);
  for (int i = 0; i < 50; ++i) {
    TruncSeries f = random_series(Coord::T, 12, rng);
    CHECK(f.to_X().to_t() == f);
  }
  TruncSeries g = random_series(Coord::X, 12, rng);
  CHECK(g.to_t().to_X() == g);
}

TEST_CASE("ring arithmetic") {
  TruncSeries t = TruncSeries::var(Coord::T, 3);
  CHECK((t * t) == TruncSeries::from_coeffs(Coord::T, {rat(0), rat(0), rat(1)}, 3));

  TruncSeries onepx = TruncSeries::var(Coord::X, 3);
  onepx.coeff(0) = 1;
  CHECK((onepx * onepx) ==
        TruncSeries::from_coeffs(Coord::X, {rat(1), rat(2), rat(1)}, 3));

  std::mt19937 rng(7);
  TruncSeries u = random_series(Coord::T, 10, rng, /*unit=*/true);
  CHECK(u * u.invert() == TruncSeries::one(Coord::T, 10));

  CHECK(TruncSeries::constant(Coord::T, 5, rat(2)).invert() ==
        TruncSeries::constant(Coord::T, 5, rat(1, 2)));

  TruncSeries onept = TruncSeries::var(Coord::T, 3);
  onept.coeff(0) = 1;
  CHECK(onept.invert() ==
        TruncSeries::from_coeffs(Coord::T, {rat(1), rat(-1), rat(1)}, 3));
  CHECK_THROWS(TruncSeries::var(Coord::T, 3).invert());

  CHECK_THROWS(t + TruncSeries::var(Coord::X, 3));  // coordinate mismatch
}

TEST_CASE("divide_by_var precision accounting") {
  TruncSeries t2 = TruncSeries::var(Coord::T, 4) * TruncSeries::var(Coord::T, 4);
  TruncSeries q = t2.divide_by_var();
  CHECK(q.trunc() == 3);
  CHECK(q == TruncSeries::var(Coord::T, 3));

  TruncSeries one = TruncSeries::one(Coord::T, 4);
  CHECK_THROWS((one + TruncSeries::var(Coord::T, 4)).divide_by_var());

  std::mt19937 rng(9);
  TruncSeries u = random_series(Coord::T, 8, rng, true);
  TruncSeries tu = TruncSeries::var(Coord::T, 8) * u;
  CHECK(tu.divide_by_var() == u.truncated(7));
}

TEST_CASE("phi on coefficients") {
  TruncSeries t = TruncSeries::var(Coord::T, 5);
  CHECK(t.phi(3) == t * rat(3));

  TruncSeries x = TruncSeries::var(Coord::X, 3);
  CHECK(x.phi(2) == TruncSeries::from_coeffs(Coord::X, {rat(0), rat(2), rat(1)}, 3));

  std::mt19937 rng(11);
  for (long p : {2L, 3L, 5L}) {
    TruncSeries f = random_series(Coord::T, 9, rng);
    CHECK(f.phi(p).to_X() == f.to_X().phi(p));
  }
}

TEST_CASE("gamma on coefficients") {
  TruncSeries t = TruncSeries::var(Coord::T, 6);
  CHECK(t.gamma(rat(5, 2)) == t * rat(5, 2));

  std::mt19937 rng(13);
  TruncSeries f = random_series(Coord::T, 9, rng);
  CHECK(f.gamma(rat(1)) == f);
  CHECK(f.gamma(rat(2, 3)).gamma(rat(3, 5)) == f.gamma(rat(2, 5)));
  CHECK(f.gamma(rat(-4, 7)).to_X() == f.to_X().gamma(rat(-4, 7)));
  CHECK_THROWS(f.gamma(rat(0)));
}

TEST_CASE("nabla: diagonal in t, conjugate in X, Leibniz") {
  TruncSeries t = TruncSeries::var(Coord::T, 5);
  CHECK((t * t).nabla() == (t * t) * rat(2));
  CHECK(TruncSeries::one(Coord::T, 5).nabla().is_zero());
  CHECK(t.nabla() == t);

  std::mt19937 rng(17);
  for (int i = 0; i < 10; ++i) {
    TruncSeries f = random_series(Coord::T, 10, rng);
    TruncSeries g = random_series(Coord::T, 10, rng);
    CHECK((f * g).nabla() == f.nabla() * g + f * g.nabla());
    CHECK(f.nabla().to_X() == f.to_X().nabla());
    CHECK(f.phi(3).nabla() == f.nabla().phi(3));
    CHECK(f.gamma(rat(7, 3)).nabla() == f.nabla().gamma(rat(7, 3)));
  }
  // Leibniz directly in the X-coordinate
  TruncSeries a = random_series(Coord::X, 10, rng);
  TruncSeries b = random_series(Coord::X, 10, rng);
  CHECK((a * b).nabla() == a.nabla() * b + a * b.nabla());
}

TEST_CASE("psi: left inverse of phi and component selection") {
  // The laws hold through exact lift composition (phi_lift); truncating phi's
  // output back to N first would change the polynomial psi sees.
  std::mt19937 rng(19);
  for (long p : {2L, 3L, 5L}) {
    for (int i = 0; i < 5; ++i) {
      std::size_t N = 10;
      TruncSeries f = random_series(Coord::X, N, rng);
      TruncSeries phif = f.phi_lift(p);
      TruncSeries back = phif.psi(p);
      CHECK(back.trunc() == N);
      CHECK(back == f);

      TruncSeries onepx = TruncSeries::var(Coord::X, phif.trunc());
      onepx.coeff(0) = 1;
      for (long j = 1; j < p; ++j) {
        TruncSeries shifted = onepx.pow(static_cast<std::size_t>(j)) * phif;
        CHECK(shifted.psi(p).is_zero());
      }
    }
  }
}

TEST_CASE("psi of X: frozen values from the decomposition system") {
  // p=2, N=8: X = f0((1+X)^2-1) + (1+X) f1((1+X)^2-1) has f0 = -1, f1 = 1.
  TruncSeries x8 = TruncSeries::var(Coord::X, 8);
  TruncSeries p0 = x8.psi(2);
  CHECK(p0.trunc() == 4);
  CHECK(p0 == TruncSeries::constant(Coord::X, 4, rat(-1)));

  // independent oracle: assemble the 8x8 system with series arithmetic
  {
    std::size_t N = 8;
    QMat sys(N, N);
    TruncSeries onepx = TruncSeries::var(Coord::X, N);
    onepx.coeff(0) = 1;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t m = 0; m < 4; ++m) {
        TruncSeries xm(Coord::X, N);
        xm.coeff(m) = 1;
        TruncSeries col = (i == 0 ? xm.phi(2) : onepx * xm.phi(2));
        for (std::size_t j = 0; j < N; ++j) sys.at(j, i * 4 + m) = col[j];
      }
    }
    QMat rhs(N, 1);
    rhs.at(1, 0) = 1;  // the series X
    auto sol = sys.solve(rhs);
    REQUIRE(sol.has_value());
    CHECK(sol->at(0, 0) == rat(-1));  // f0 constant term
    CHECK(sol->at(1, 0) == 0);
    CHECK(sol->at(4, 0) == rat(1));  // f1 constant term
  }

  // p=3, N=9
  TruncSeries x9 = TruncSeries::var(Coord::X, 9);
  CHECK(x9.psi(3) == TruncSeries::constant(Coord::X, 3, rat(-1)));
  TruncSeries x9sq = x9 * x9;
  CHECK(x9sq.psi(3) == TruncSeries::constant(Coord::X, 3, rat(1)));

  // exact parts of X^2 for p=2: f0 = X + 2, f1 = -2
  auto parts = psi_parts({rat(0), rat(0), rat(1)}, 2);
  REQUIRE(parts.size() == 2);
  CHECK(poly_trim(parts[0]) == std::vector<Rational>{rat(2), rat(1)});
  CHECK(poly_trim(parts[1]) == std::vector<Rational>{rat(-2)});
}

TEST_CASE("series parser") {
  TruncSeries f = parse_poly("1 - 1/2*t + 3*t^2", Coord::T, 5);
  CHECK(f == TruncSeries::from_coeffs(Coord::T, {rat(1), rat(-1, 2), rat(3)}, 5));
  CHECK(parse_poly("0", Coord::T, 3).is_zero());
  CHECK(parse_poly("t", Coord::T, 3) == TruncSeries::var(Coord::T, 3));
  CHECK(parse_poly("-t + t", Coord::T, 3).is_zero());
  CHECK(parse_poly("X^2", Coord::X, 4) ==
        TruncSeries::from_coeffs(Coord::X, {rat(0), rat(0), rat(1)}, 4));
  CHECK(parse_poly("2*t^3 + 7/3", Coord::T, 8)[3] == rat(2));

  CHECK_THROWS_AS(parse_poly("1 + X", Coord::T, 4), ParseError);
  CHECK_THROWS_AS(parse_poly("t^9", Coord::T, 4), ParseError);
  CHECK_THROWS_AS(parse_poly("1 +", Coord::T, 4), ParseError);
  CHECK_THROWS_AS(parse_poly("", Coord::T, 4), ParseError);
  CHECK_THROWS_AS(parse_poly("1/0", Coord::T, 4), ParseError);

  // round trip through to_string
  std::mt19937 rng(23);
  for (int i = 0; i < 20; ++i) {
    TruncSeries g = random_series(Coord::T, 7, rng);
    CHECK(parse_poly(g.to_string(), Coord::T, 7) == g);
  }
}

TEST_CASE("mult_matrix matches ring multiplication") {
  std::mt19937 rng(29);
  TruncSeries f = random_series(Coord::T, 6, rng);
  TruncSeries g = random_series(Coord::T, 6, rng);
  QMat gv(6, 1);
  for (std::size_t i = 0; i < 6; ++i) gv.at(i, 0) = g[i];
  QMat prod = f.mult_matrix() * gv;
  TruncSeries fg = f * g;
  for (std::size_t i = 0; i < 6; ++i) CHECK(prod.at(i, 0) == fg[i]);
}

TEST_CASE("degenerate truncations") {
  CHECK_THROWS(TruncSeries::zero(Coord::T, 0));
  TruncSeries c = TruncSeries::constant(Coord::T, 1, rat(5));
  CHECK((c * c)[0] == rat(25));
  CHECK(c.nabla().is_zero());
  CHECK(c.phi(2) == c);
}
