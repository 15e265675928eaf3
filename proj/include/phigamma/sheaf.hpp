#pragma once

// psi and ball restrictions at torsion level.
//
// phi multiplies t-degrees by p, so over the truncated ring the psi/res
// calculus only composes honestly through canonical polynomial lifts:
// every operator here lifts once, works in exact polynomial arithmetic in
// the X-coordinate (widths widen through phi and shrink through psi), and
// truncates once, on exit. Re-truncating an intermediate hands psi_parts a
// different polynomial and poisons low degrees (see series.hpp).
//
// Output precisions: psi_module reports floor(N/p); res_ball over a center
// i < p^n reports floor(N/p^n) - n, the window on which the partition and
// idempotence laws are certified by the tests. Level 0 is the identity.
//
// verify_psi_tensor / verify_res_tensor check the product structure on
// D (x) V_k, where (1+X) acts diagonally (series twist on D, unipotent on
// V_k) and phi acts factorwise. A corrupted V_k-Frobenius with a matching
// inverse slips through any reconstruction identity, so the verifiers also
// check phi-semilinearity against the (1+X)-action and nondegeneracy of the
// decomposition on the low-degree slab; those three together pin the parts
// of v (x) w to v_a (x) phiV^{-1} u^{-a} w, whose zeroth term is the product
// formula for psi.

#include <phigamma/pgmod.hpp>
#include <phigamma/symk.hpp>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phigamma {

namespace sheaf_detail {

inline TruncSeries onepx_power(unsigned long e, std::size_t width) {
  return TruncSeries::from_coeffs(Coord::X, poly_onepx_pow(e), width);
}

inline SeriesMat x_entries(const SeriesMat& f) {
  SeriesMat r(f.rows(), f.cols(), Coord::X, f.trunc());
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t j = 0; j < f.cols(); ++j) r.at(i, j) = f.at(i, j).to_X();
  return r;
}

// substitution X -> (1+X)^p - 1 on X-degree coordinates
inline QMat phi_substitution(long p, std::size_t n) {
  QMat m(n, n);
  TruncSeries xp = TruncSeries::var(Coord::X, n).phi(p);
  TruncSeries acc = TruncSeries::one(Coord::X, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) m.at(r, c) = acc[r];
    if (c + 1 < n) acc = acc * xp;
  }
  return m;
}

inline void check_element(const TorsionModule& d, const std::vector<TruncSeries>& v,
                          const char* who) {
  if (v.size() != d.rank)
    throw std::invalid_argument(std::string(who) + ": wrong component count");
  for (const auto& f : v)
    if (f.trunc() != v[0].trunc())
      throw std::invalid_argument(std::string(who) + ": mixed truncations");
}

inline unsigned long upow(long p, unsigned n) {
  unsigned long r = 1;
  for (unsigned s = 0; s < n; ++s) r *= static_cast<unsigned long>(p);
  return r;
}

}  // namespace sheaf_detail

// psi of F^{-1} v, componentwise; the inverse entries act through their
// canonical lifts at the width of v. Output precision floor(width/p).
inline std::vector<TruncSeries> psi_module(const TorsionModule& d,
                                           const std::vector<TruncSeries>& v) {
  if (!d.phi_mat) throw std::invalid_argument("psi_module: no Frobenius attached");
  sheaf_detail::check_element(d, v, "psi_module");
  std::size_t w = v[0].trunc();
  SeriesMat finv = d.phi_mat->inverse();
  std::vector<TruncSeries> out;
  for (std::size_t r = 0; r < d.rank; ++r) {
    TruncSeries acc = TruncSeries::zero(Coord::T, w);
    for (std::size_t c = 0; c < d.rank; ++c) acc = acc + finv.at(r, c).lifted_to(w) * v[c];
    out.push_back(acc.to_X().psi(d.prime).to_t());
  }
  return out;
}

// Exact module phi on canonical lifts, reported at width p*w (the analogue
// of TruncSeries::phi_lift); psi_module undoes it exactly when the
// Frobenius matrix entries are constants.
inline std::vector<TruncSeries> phi_module_lift(const TorsionModule& d,
                                                const std::vector<TruncSeries>& v) {
  if (!d.phi_mat) throw std::invalid_argument("phi_module_lift: no Frobenius attached");
  sheaf_detail::check_element(d, v, "phi_module_lift");
  std::size_t w = v[0].trunc() * static_cast<std::size_t>(d.prime);
  std::vector<TruncSeries> img;
  for (std::size_t c = 0; c < d.rank; ++c) img.push_back(v[c].to_X().phi_lift(d.prime));
  std::vector<TruncSeries> out;
  for (std::size_t r = 0; r < d.rank; ++r) {
    TruncSeries acc = TruncSeries::zero(Coord::X, w);
    for (std::size_t c = 0; c < d.rank; ++c)
      acc = acc + d.phi_mat->at(r, c).to_X().lifted_to(w) * img[c];
    out.push_back(acc.to_t());
  }
  return out;
}

// Restriction to the ball i + p^n Z_p: center the ball at zero, strip n
// phi-layers, put them back, restore the twist:
//   (1+X)^{i-p^n} phi^n psi^n (1+X)^{p^n-i}.
// Every psi-step takes the exact part 0 of the full working polynomial;
// nothing is sliced until the final truncation.
inline std::vector<TruncSeries> res_ball(const TorsionModule& d,
                                         const std::vector<TruncSeries>& v, unsigned long i,
                                         unsigned n) {
  sheaf_detail::check_element(d, v, "res_ball");
  if (v[0].trunc() != d.trunc) throw std::invalid_argument("res_ball: truncation mismatch");
  unsigned long P = sheaf_detail::upow(d.prime, n);
  if (i >= P) throw std::invalid_argument("res_ball: center out of range");
  if (n == 0) return v;
  if (!d.phi_mat) throw std::invalid_argument("res_ball: no Frobenius attached");
  std::size_t q = d.trunc / P;
  if (q <= n) throw std::domain_error("res_ball: precision exhausted");
  q -= n;

  std::size_t p = static_cast<std::size_t>(d.prime);
  std::size_t wid = d.trunc + static_cast<std::size_t>(P - i);
  TruncSeries tw = sheaf_detail::onepx_power(P - i, wid);
  std::vector<TruncSeries> xs;
  for (std::size_t r = 0; r < d.rank; ++r) xs.push_back(v[r].to_X().lifted_to(wid) * tw);

  SeriesMat finv = d.phi_mat->inverse();
  for (unsigned s = 0; s < n; ++s) {
    std::size_t cur = xs[0].trunc();
    std::vector<TruncSeries> h;
    for (std::size_t r = 0; r < d.rank; ++r) {
      TruncSeries acc = TruncSeries::zero(Coord::X, cur);
      for (std::size_t c = 0; c < d.rank; ++c)
        acc = acc + finv.at(r, c).to_X().lifted_to(cur) * xs[c];
      h.push_back(acc);
    }
    std::size_t nw = std::max<std::size_t>(1, (cur + p - 1) / p);
    xs.clear();
    for (std::size_t r = 0; r < d.rank; ++r)
      xs.push_back(TruncSeries::from_coeffs(Coord::X, psi_parts(h[r].coeffs(), d.prime)[0], nw));
  }
  for (unsigned s = 0; s < n; ++s) {
    for (std::size_t r = 0; r < d.rank; ++r) xs[r] = xs[r].phi_lift(d.prime);
    std::size_t cur = xs[0].trunc();
    std::vector<TruncSeries> y;
    for (std::size_t r = 0; r < d.rank; ++r) {
      TruncSeries acc = TruncSeries::zero(Coord::X, cur);
      for (std::size_t c = 0; c < d.rank; ++c)
        acc = acc + d.phi_mat->at(r, c).to_X().lifted_to(cur) * xs[c];
      y.push_back(acc);
    }
    xs = std::move(y);
  }

  TruncSeries untw = sheaf_detail::onepx_power(P - i, xs[0].trunc()).invert();
  std::vector<TruncSeries> out;
  for (std::size_t r = 0; r < d.rank; ++r) out.push_back((xs[r] * untw).truncated(q).to_t());
  return out;
}

struct BallRestriction {
  unsigned long center = 0;
  unsigned level = 0;
  std::size_t precision = 0;
  QMat op;  // (rank * precision) x dim(d), t-degree coordinates on both sides
};

inline BallRestriction ball_restriction(const TorsionModule& d, unsigned long i, unsigned n) {
  std::vector<QMat> cols;
  std::size_t q = 0;
  for (std::size_t j = 0; j < d.rank; ++j)
    for (std::size_t deg = 0; deg < d.trunc; ++deg) {
      std::vector<TruncSeries> v(d.rank, TruncSeries::zero(Coord::T, d.trunc));
      v[j].coeff(deg) = 1;
      auto rb = res_ball(d, v, i, n);
      q = rb[0].trunc();
      QMat col(d.rank * q, 1);
      for (std::size_t r = 0; r < d.rank; ++r)
        for (std::size_t m = 0; m < q; ++m) col.at(r * q + m, 0) = rb[r][m];
      cols.push_back(col);
    }
  BallRestriction br{i, n, q, QMat(d.rank * q, d.dim())};
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t row = 0; row < d.rank * q; ++row) br.op.at(row, c) = cols[c].at(row, 0);
  return br;
}

namespace sheaf_detail {

struct TensorOps {
  std::size_t dimD = 0, dimT = 0;
  QMat phiT, uT;              // factorwise phi, diagonal (1+X)
  std::vector<QMat> uT_pow;   // uT^a for a <= P
  QMat phiD, onepxD;          // D-side blocks on X-degree coordinates
};

inline TensorOps tensor_ops(const TorsionModule& d, const SymPower& sym, const QMat& b,
                            unsigned long P) {
  TensorOps t;
  std::size_t N = d.trunc;
  t.dimD = d.rank * N;
  t.dimT = sym.dim() * t.dimD;
  TruncSeries onepx = TruncSeries::one(Coord::X, N) + TruncSeries::var(Coord::X, N);
  t.onepxD = pg_detail::block_diag(onepx.mult_matrix(), d.rank);
  t.phiD = x_entries(*d.phi_mat).mult_operator() *
           pg_detail::block_diag(phi_substitution(d.prime, N), d.rank);
  QMat uV = sym.group_matrix({Rational(1), Rational(1), Rational(0), Rational(1)});
  t.phiT = kron(b, t.phiD);
  t.uT = kron(uV, t.onepxD);
  t.uT_pow.push_back(QMat::identity(t.dimT));
  for (unsigned long a = 0; a < P; ++a) t.uT_pow.push_back(t.uT_pow.back() * t.uT);
  return t;
}

// columns U^a Phi (slab of X-degrees < M), square when P*M = N
inline bool slab_nondegenerate(const TorsionModule& d, const TensorOps& t, const QMat& phin,
                               unsigned long P, std::size_t M) {
  std::size_t slots = t.dimT / t.dimD;
  QMat S(t.dimT, t.dimT);
  std::size_t col = 0;
  for (unsigned long a = 0; a < P; ++a) {
    QMat w = t.uT_pow[a] * phin;
    for (std::size_t l = 0; l < slots; ++l)
      for (std::size_t r = 0; r < d.rank; ++r)
        for (std::size_t m = 0; m < M; ++m) {
          std::size_t idx = l * t.dimD + r * d.trunc + m;
          for (std::size_t row = 0; row < t.dimT; ++row) S.at(row, col) = w.at(row, idx);
          ++col;
        }
  }
  return S.is_invertible();
}

}  // namespace sheaf_detail

// Product form of psi on D (x) V_k, checked exactly on the full coordinate
// basis (p must divide the truncation so the slab decomposition is square):
//   1. phi_T (1+X)_T == (1+X)_T^p phi_T,
//   2. the level-1 decomposition against the slab of X-degrees < N/p is
//      nondegenerate, so parts are unique,
//   3. v (x) w reconstructs from the parts v_a (x) phiV^{-1} u^{-a} w,
// with v_a the parts of F^{-1} v. phi_v overrides the V_k-Frobenius: the
// stock matrix passes, a semilinearity-breaking corruption fails.
inline bool verify_psi_tensor(const TorsionModule& d, unsigned k, const QMat* phi_v = nullptr) {
  if (!d.phi_mat) throw std::invalid_argument("verify_psi_tensor: no Frobenius attached");
  std::size_t N = d.trunc;
  long p = d.prime;
  std::size_t P = static_cast<std::size_t>(p);
  if (N % P != 0) throw std::invalid_argument("verify_psi_tensor: truncation must be a multiple of p");
  std::size_t M = N / P;

  SymPower sym = make_symk(k);
  QMat b = phi_v ? *phi_v : sym.phi_matrix(p);
  auto binv = b.inverse();
  if (!binv) return false;
  auto t = sheaf_detail::tensor_ops(d, sym, b, P);

  if (!(t.phiT * t.uT == t.uT_pow[P] * t.phiT)) return false;
  if (!sheaf_detail::slab_nondegenerate(d, t, t.phiT, P, M)) return false;

  // V-side of the parts: columns of binv * u^{-a}
  std::vector<QMat> y;
  for (std::size_t a = 0; a < P; ++a)
    y.push_back(*binv * sym.group_matrix({Rational(1), Rational(-static_cast<long>(a)),
                                          Rational(0), Rational(1)}));

  QMat finvX = sheaf_detail::x_entries(d.phi_mat->inverse()).mult_operator();
  for (std::size_t cidx = 0; cidx < t.dimD; ++cidx) {
    QMat c(t.dimD, 1);
    c.at(cidx, 0) = 1;
    QMat g = finvX * c;
    std::vector<QMat> va(P, QMat(t.dimD, 1));
    for (std::size_t r = 0; r < d.rank; ++r) {
      std::vector<Rational> coeffs(N);
      for (std::size_t m = 0; m < N; ++m) coeffs[m] = g.at(r * N + m, 0);
      auto parts = psi_parts(coeffs, p);
      for (std::size_t a = 0; a < P; ++a)
        for (std::size_t m = 0; m < parts[a].size() && m < N; ++m)
          va[a].at(r * N + m, 0) = parts[a][m];
    }
    for (unsigned l = 0; l <= k; ++l) {
      QMat rhs(t.dimT, 1);
      for (std::size_t a = 0; a < P; ++a) {
        QMat tc(t.dimT, 1);
        for (unsigned l2 = 0; l2 <= k; ++l2)
          for (std::size_t row = 0; row < t.dimD; ++row)
            tc.at(l2 * t.dimD + row, 0) = y[a].at(l2, l) * va[a].at(row, 0);
        rhs = rhs + t.uT_pow[a] * (t.phiT * tc);
      }
      QMat target(t.dimT, 1);
      target.at(l * t.dimD + cidx, 0) = 1;
      if (!(rhs == target)) return false;
    }
  }
  return true;
}

// Level-n restriction on D (x) V_k against a center i < p^n (p^n must
// divide the truncation). Checks 1 and 2 as in verify_psi_tensor with
// phi_T^n and the slab of X-degrees < N/p^n, then per basis tensor:
//   3. reconstruction from the level-n parts x_j (x) phiV^{-n} u^{-j} w,
//   4. the j = i term equals res_ball (x) id at its output precision,
// which crosses the part-selector route against the step pipeline.
inline bool verify_res_tensor(const TorsionModule& d, unsigned k, unsigned long i, unsigned n,
                              const QMat* phi_v = nullptr) {
  if (!d.phi_mat) throw std::invalid_argument("verify_res_tensor: no Frobenius attached");
  std::size_t N = d.trunc;
  long p = d.prime;
  unsigned long P = sheaf_detail::upow(p, n);
  if (i >= P) throw std::invalid_argument("verify_res_tensor: center out of range");
  if (N % P != 0)
    throw std::invalid_argument("verify_res_tensor: truncation must be a multiple of p^n");
  std::size_t M = N / P;

  SymPower sym = make_symk(k);
  QMat b = phi_v ? *phi_v : sym.phi_matrix(p);
  auto binv = b.inverse();
  if (!binv) return false;
  std::size_t pP = static_cast<std::size_t>(P);
  auto t = sheaf_detail::tensor_ops(d, sym, b, std::max<unsigned long>(pP, static_cast<unsigned long>(p)));

  if (!(t.phiT * t.uT == t.uT_pow[static_cast<std::size_t>(p)] * t.phiT)) return false;
  QMat phiTn = QMat::identity(t.dimT), phiDn = QMat::identity(t.dimD);
  for (unsigned s = 0; s < n; ++s) {
    phiTn = phiTn * t.phiT;
    phiDn = phiDn * t.phiD;
  }
  if (n > 0 && !sheaf_detail::slab_nondegenerate(d, t, phiTn, pP, M)) return false;

  // cocycle F phi(F) ... phi^{n-1}(F): the matrix of the n-fold module phi
  SeriesMat fn = *d.phi_mat, fs = *d.phi_mat;
  for (unsigned s = 1; s < n; ++s) {
    fs = fs.phi(p);
    fn = fn * fs;
  }
  QMat fninvX = sheaf_detail::x_entries(fn.inverse()).mult_operator();

  QMat onepxDi = QMat::identity(t.dimD);
  for (unsigned long s = 0; s < i; ++s) onepxDi = onepxDi * t.onepxD;
  QMat bninv = QMat::identity(k + 1);
  for (unsigned s = 0; s < n; ++s) bninv = bninv * *binv;
  std::vector<QMat> y;
  for (std::size_t a = 0; a < pP; ++a)
    y.push_back(bninv * sym.group_matrix({Rational(1), Rational(-static_cast<long>(a)),
                                          Rational(0), Rational(1)}));

  for (std::size_t cidx = 0; cidx < t.dimD; ++cidx) {
    QMat c(t.dimD, 1);
    c.at(cidx, 0) = 1;
    std::vector<QMat> xj(pP, QMat(t.dimD, 1));
    if (n == 0) {
      xj[0] = c;
    } else {
      QMat g = fninvX * c;
      for (std::size_t r = 0; r < d.rank; ++r) {
        std::vector<Rational> coeffs(N);
        for (std::size_t m = 0; m < N; ++m) coeffs[m] = g.at(r * N + m, 0);
        auto parts = psi_parts(coeffs, static_cast<long>(P));
        for (std::size_t a = 0; a < pP; ++a)
          for (std::size_t m = 0; m < parts[a].size() && m < N; ++m)
            xj[a].at(r * N + m, 0) = parts[a][m];
      }
    }

    // step-pipeline route for the same column
    std::vector<TruncSeries> vmod;
    for (std::size_t r = 0; r < d.rank; ++r) {
      std::vector<Rational> coeffs(N);
      for (std::size_t m = 0; m < N; ++m) coeffs[m] = c.at(r * N + m, 0);
      vmod.push_back(TruncSeries::from_coeffs(Coord::X, coeffs, N).to_t());
    }
    auto rb = res_ball(d, vmod, i, n);
    std::size_t q = rb[0].trunc();
    QMat sel = onepxDi * (phiDn * xj[i]);
    for (std::size_t r = 0; r < d.rank; ++r) {
      TruncSeries rx = rb[r].to_X();
      for (std::size_t m = 0; m < q; ++m)
        if (!(rx[m] == sel.at(r * N + m, 0))) return false;
    }

    for (unsigned l = 0; l <= k; ++l) {
      QMat rhs(t.dimT, 1);
      for (std::size_t a = 0; a < pP; ++a) {
        QMat tc(t.dimT, 1);
        for (unsigned l2 = 0; l2 <= k; ++l2)
          for (std::size_t row = 0; row < t.dimD; ++row)
            tc.at(l2 * t.dimD + row, 0) = y[a].at(l2, l) * xj[a].at(row, 0);
        rhs = rhs + t.uT_pow[a] * (phiTn * tc);
      }
      QMat target(t.dimT, 1);
      target.at(l * t.dimD + cidx, 0) = 1;
      if (!(rhs == target)) return false;
    }
  }
  return true;
}

}  // namespace phigamma
