#include <phigamma/sheaf.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace phigamma;

namespace {

TorsionModule trivial2() { return make_rank_one(Rational(0), Rational(1), 8, 2); }
TorsionModule trivial3() { return make_rank_one(Rational(0), Rational(1), 9, 3); }

TorsionModule etale3(std::size_t n = 9) {
  QMat f(2, 2);
  f.at(0, 0) = 1;
  f.at(1, 1) = rat(1, 3);
  return with_phi(make_sen_model(SenShape::diagonal, Rational(2), n, 3),
                  SeriesMat::constant(f, Coord::T, n));
}

TorsionModule nilp2() {
  return with_phi(make_sen_model(SenShape::nilpotent, Rational(0), 8, 2),
                  SeriesMat::identity(2, Coord::T, 8));
}

std::vector<TruncSeries> random_elem(std::mt19937& g, const TorsionModule& d) {
  std::uniform_int_distribution<long> pick(-9, 9);
  std::vector<TruncSeries> v;
  for (std::size_t r = 0; r < d.rank; ++r) {
    std::vector<Rational> cs(d.trunc);
    for (auto& c : cs) c = Rational(pick(g));
    v.push_back(TruncSeries::from_coeffs(Coord::T, std::move(cs), d.trunc));
  }
  return v;
}

TruncSeries onepx_t(std::size_t w) {
  return TruncSeries::expm1_t(w) + TruncSeries::one(Coord::T, w);
}

TruncSeries tser(std::vector<Rational> cs, std::size_t w) {
  return TruncSeries::from_coeffs(Coord::T, std::move(cs), w);
}

}  // namespace

TEST_CASE("psi undoes exact phi on module lifts") {
  std::mt19937 g(3341u);
  for (const auto& d : {trivial3(), etale3(), trivial2()}) {
    for (int trial = 0; trial < 20; ++trial) {
      auto v = random_elem(g, d);
      auto w = phi_module_lift(d, v);
      auto back = psi_module(d, w);
      for (std::size_t r = 0; r < d.rank; ++r) CHECK(back[r] == v[r]);

      TruncSeries tw = onepx_t(w[0].trunc());
      for (auto& comp : w) comp = comp * tw;
      auto killed = psi_module(d, w);
      for (std::size_t r = 0; r < d.rank; ++r) CHECK(killed[r].is_zero());
    }
  }
}

TEST_CASE("psi of the coordinate series matches hand values") {
  SECTION("psi(X) = -1 for p = 2") {
    auto out = psi_module(trivial2(), {TruncSeries::expm1_t(8)});
    CHECK(out[0] == TruncSeries::constant(Coord::T, 4, Rational(-1)));
  }
  SECTION("psi(X) = -1 and psi(X^2) = 1 for p = 3") {
    TruncSeries x = TruncSeries::expm1_t(9);
    auto out = psi_module(trivial3(), {x});
    CHECK(out[0] == TruncSeries::constant(Coord::T, 3, Rational(-1)));
    out = psi_module(trivial3(), {x * x});
    CHECK(out[0] == TruncSeries::constant(Coord::T, 3, Rational(1)));
  }
  SECTION("rank two with distinct Frobenius scalars") {
    TorsionModule d = etale3();
    TruncSeries t = TruncSeries::var(Coord::T, 9);
    auto out = psi_module(d, {t, t * t});
    CHECK(out[0] == tser({rat(3159, 280), rat(28, 3)}, 3));
    CHECK(out[1] == tser({rat(-99711, 560), rat(-621, 5), rat(28, 3)}, 3));
  }
}

TEST_CASE("ball restrictions of the coordinate series") {
  TorsionModule d = trivial2();
  std::vector<TruncSeries> v{TruncSeries::expm1_t(8)};
  auto r1 = res_ball(d, v, 1, 1);
  CHECK(r1[0] == tser({1, 1, rat(1, 2)}, 3));  // (1+X) in the t-coordinate
  auto r0 = res_ball(d, v, 0, 1);
  CHECK(r0[0] == TruncSeries::constant(Coord::T, 3, Rational(-1)));
  CHECK(r0[0] + r1[0] == v[0].truncated(3));
}

TEST_CASE("restriction to a level-two ball selects its own branch") {
  // v = (1+X)^3 phi^2(1 + 2X) lives over the class of 3 mod 4
  TorsionModule d = make_rank_one(Rational(0), Rational(1), 28, 2);
  std::vector<Rational> cs{1, 11, 39, 69, 70, 42, 14, 2};
  std::vector<TruncSeries> v{TruncSeries::from_coeffs(Coord::X, cs, 28).to_t()};
  for (unsigned long i = 0; i < 4; ++i) {
    auto out = res_ball(d, v, i, 2);
    REQUIRE(out[0].trunc() == 5);
    if (i == 3) {
      CHECK(out[0].to_X() == TruncSeries::from_coeffs(Coord::X, cs, 5));
    } else {
      CHECK(out[0].is_zero());
    }
  }
}

TEST_CASE("partition of unity at the certified precision") {
  std::mt19937 g(5519u);
  auto check_partition = [&](const TorsionModule& d, unsigned n) {
    unsigned long balls = 1;
    for (unsigned s = 0; s < n; ++s) balls *= static_cast<unsigned long>(d.prime);
    for (int trial = 0; trial < 5; ++trial) {
      auto v = random_elem(g, d);
      auto acc = res_ball(d, v, 0, n);
      for (unsigned long i = 1; i < balls; ++i) {
        auto ri = res_ball(d, v, i, n);
        for (std::size_t r = 0; r < d.rank; ++r) acc[r] = acc[r] + ri[r];
      }
      std::size_t q = acc[0].trunc();
      for (std::size_t r = 0; r < d.rank; ++r) CHECK(acc[r] == v[r].truncated(q));
    }
  };
  check_partition(trivial2(), 1);
  check_partition(trivial3(), 1);
  check_partition(etale3(), 1);
  check_partition(nilp2(), 1);
  check_partition(make_rank_one(Rational(0), Rational(1), 16, 2), 2);
}

TEST_CASE("restrictions fix their own branch and kill the others") {
  std::mt19937 g(7717u);
  // branch-i elements (1+X)^i phi(x) reproduce under their own restriction
  // and vanish under every other; this is the idempotent-family law that
  // survives truncation, since the branch element is an exact lift image.
  auto branch_check = [&](const TorsionModule& dsmall, const TorsionModule& d) {
    auto x = random_elem(g, dsmall);
    auto fx = phi_module_lift(dsmall, x);
    REQUIRE(fx[0].trunc() == d.trunc);
    TruncSeries tw = onepx_t(d.trunc);
    for (unsigned long i = 0; i < static_cast<unsigned long>(d.prime); ++i) {
      std::vector<TruncSeries> v;
      for (const auto& comp : fx) {
        TruncSeries c2 = comp;
        for (unsigned long s = 0; s < i; ++s) c2 = c2 * tw;
        v.push_back(c2);
      }
      for (unsigned long j = 0; j < static_cast<unsigned long>(d.prime); ++j) {
        auto out = res_ball(d, v, j, 1);
        for (std::size_t r = 0; r < d.rank; ++r) {
          if (j == i)
            CHECK(out[r] == v[r].truncated(out[r].trunc()));
          else
            CHECK(out[r].is_zero());
        }
      }
    }
  };
  branch_check(trivial2(), make_rank_one(Rational(0), Rational(1), 16, 2));
  branch_check(etale3(9), etale3(27));
}

TEST_CASE("restriction operators act on coordinates") {
  std::mt19937 g(9923u);
  for (const auto& d : {trivial2(), etale3()}) {
    BallRestriction br = ball_restriction(d, 1, 1);
    CHECK(br.center == 1);
    CHECK(br.level == 1);
    CHECK(br.precision == d.trunc / static_cast<std::size_t>(d.prime) - 1);
    auto v = random_elem(g, d);
    auto direct = res_ball(d, v, 1, 1);
    QMat coords = br.op * d.to_coords(v);
    for (std::size_t r = 0; r < d.rank; ++r)
      for (std::size_t m = 0; m < br.precision; ++m)
        CHECK(coords.at(r * br.precision + m, 0) == direct[r][m]);
  }
  SECTION("level zero is the identity") {
    BallRestriction br = ball_restriction(trivial2(), 0, 0);
    CHECK(br.precision == 8);
    CHECK(br.op == QMat::identity(8));
  }
}

TEST_CASE("psi is stable under slicing and width changes") {
  std::mt19937 g(2221u);
  SECTION("coefficients beyond the psi window are ignored") {
    TorsionModule d = make_rank_one(Rational(0), Rational(1), 8, 3);  // window 3*2 = 6
    auto v = random_elem(g, d);
    auto w = v;
    w[0].coeff(6) = w[0][6] + 5;
    w[0].coeff(7) = w[0][7] - 3;
    CHECK(psi_module(d, v)[0] == psi_module(d, w)[0]);
  }
  SECTION("the same X-polynomial gives the same parts at any width") {
    // the canonical lift lives in the X-coordinate: widening there is
    // invisible to psi, while a t-degree lift changes the X-polynomial
    TorsionModule d = trivial2();
    TorsionModule dwide = make_rank_one(Rational(0), Rational(1), 16, 2);
    auto v = random_elem(g, d);
    std::vector<TruncSeries> vwide{v[0].to_X().lifted_to(16).to_t()};
    CHECK(psi_module(d, v)[0] == psi_module(dwide, vwide)[0].truncated(4));
  }
}

TEST_CASE("sheaf operators reject unusable modules") {
  TorsionModule bare = make_sen_model(SenShape::diagonal, Rational(2), 8, 2);
  std::vector<TruncSeries> v(2, TruncSeries::zero(Coord::T, 8));
  CHECK_THROWS_AS(psi_module(bare, v), std::invalid_argument);
  CHECK_THROWS_AS(res_ball(bare, v, 0, 1), std::invalid_argument);

  QMat sing(2, 2);
  sing.at(0, 0) = 1;  // second Frobenius column vanishes
  TorsionModule broken = with_phi(make_sen_model(SenShape::zero, Rational(0), 8, 2),
                                  SeriesMat::constant(sing, Coord::T, 8));
  CHECK_THROWS_AS(psi_module(broken, v), std::domain_error);

  TorsionModule d = trivial2();
  std::vector<TruncSeries> one{TruncSeries::one(Coord::T, 8)};
  CHECK_THROWS_AS(res_ball(d, one, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(res_ball(d, one, 0, 3), std::domain_error);
  CHECK_THROWS_AS(psi_module(d, std::vector<TruncSeries>{}), std::invalid_argument);
}

TEST_CASE("product structure carries psi through the tensor") {
  for (unsigned k = 1; k <= 2; ++k) {
    CHECK(verify_psi_tensor(trivial2(), k));
    CHECK(verify_psi_tensor(etale3(), k));
    CHECK(verify_psi_tensor(nilp2(), k));
    CHECK(verify_psi_tensor(make_rank_one(rat(5, 2), Rational(1), 8, 2), k));
  }
  SECTION("a corrupted V_k-Frobenius fails") {
    QMat bad = make_symk(1).phi_matrix(2);
    bad.at(1, 1) = 3;
    CHECK_FALSE(verify_psi_tensor(trivial2(), 1, &bad));

    QMat bad3 = make_symk(2).phi_matrix(3);
    bad3.at(1, 1) = bad3.at(1, 1) + 1;
    CHECK_FALSE(verify_psi_tensor(etale3(), 2, &bad3));

    QMat sing(2, 2);
    sing.at(0, 0) = 1;
    CHECK_FALSE(verify_psi_tensor(trivial2(), 1, &sing));
  }
  SECTION("truncation must be compatible with p") {
    TorsionModule odd = make_rank_one(Rational(0), Rational(1), 8, 3);
    CHECK_THROWS_AS(verify_psi_tensor(odd, 1), std::invalid_argument);
  }
}

TEST_CASE("ball restrictions commute with the tensor factor") {
  for (unsigned k = 1; k <= 2; ++k) {
    CHECK(verify_res_tensor(trivial2(), k, 0, 0));
    CHECK(verify_res_tensor(trivial2(), k, 0, 1));
    CHECK(verify_res_tensor(trivial2(), k, 1, 1));
  }
  for (unsigned long i = 0; i < 3; ++i) CHECK(verify_res_tensor(etale3(), 1, i, 1));
  CHECK(verify_res_tensor(etale3(), 2, 1, 1));
  CHECK(verify_res_tensor(nilp2(), 1, 0, 1));
  CHECK(verify_res_tensor(nilp2(), 1, 1, 1));
  CHECK(verify_res_tensor(make_rank_one(rat(5, 2), Rational(1), 8, 2), 2, 1, 1));

  SECTION("a corrupted V_k-Frobenius fails at every level") {
    QMat bad = make_symk(1).phi_matrix(2);
    bad.at(1, 1) = 3;
    CHECK_FALSE(verify_res_tensor(trivial2(), 1, 0, 0, &bad));
    CHECK_FALSE(verify_res_tensor(trivial2(), 1, 1, 1, &bad));
  }
  SECTION("centers out of range are rejected") {
    CHECK_THROWS_AS(verify_res_tensor(trivial2(), 1, 2, 1), std::invalid_argument);
  }
}
