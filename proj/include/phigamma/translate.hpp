#pragma once

#include <phigamma/pgmod.hpp>
#include <phigamma/symk.hpp>
#include <phigamma/ugl2.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phigamma {

// D (x) V_k with the product structure: t acts as t_D plus the raising
// operator of V_k, the Lie algebra acts diagonally, phi multiplies the two
// factors. Coordinates are slot-major: the V_k basis index is the outer
// block, the flattened D index the inner one.
//
// The casimir endomorphism is built twice on purpose: once by evaluating
// the normal form of the universal element on the diagonal generator
// matrices, once by assembling the componentwise second-order recursion
// with the central scalars substituted. The constructor checks that the
// two agree everywhere except in the top t-degree of the D factor, where
// dividing by t has already cost one coefficient.
struct TranslatedModule {
  TorsionModule base;
  unsigned k = 0;
  Rational alpha;
  Gl2Structure base_gl2;
  QMat t_action;
  QMat nabla;
  std::optional<QMat> phi;
  Gl2Mats gl2;
  QMat casimir_pbw;     // normal form evaluated on the diagonal matrices
  QMat casimir_blocks;  // componentwise assembly, central scalars exact

  std::size_t dim() const { return base.dim() * (k + 1); }
  std::size_t tidx(std::size_t slot, std::size_t m) const { return slot * base.dim() + m; }
  // precision surviving the k+1 degrees eroded by the tensor t-action
  std::size_t usable() const { return base.trunc - k - 1; }

  // v (x) e_0 + ... |-> v : drop everything above the bottom slot
  QMat proj0() const {
    QMat p(base.dim(), dim());
    for (std::size_t m = 0; m < base.dim(); ++m) p.at(m, tidx(0, m)) = 1;
    return p;
  }

  // v |-> v (x) e_k : section onto the top filtration step
  QMat injk() const {
    QMat p(dim(), base.dim());
    for (std::size_t m = 0; m < base.dim(); ++m) p.at(tidx(k, m), m) = 1;
    return p;
  }
};

// unit coordinate columns of total degree (slot + t-degree) >= dmin
inline QMat tail_coordinates(const TranslatedModule& tm, std::size_t dmin) {
  std::vector<std::size_t> picks;
  for (std::size_t slot = 0; slot <= tm.k; ++slot)
    for (std::size_t j = 0; j < tm.base.rank; ++j)
      for (std::size_t deg = 0; deg < tm.base.trunc; ++deg)
        if (slot + deg >= dmin) picks.push_back(tm.tidx(slot, tm.base.idx(j, deg)));
  QMat cols(tm.dim(), picks.size());
  for (std::size_t c = 0; c < picks.size(); ++c) cols.at(picks[c], c) = 1;
  return cols;
}

// unit coordinate columns of t-degree >= dmin in a plain module
inline QMat tail_coordinates(const TorsionModule& d, std::size_t dmin) {
  std::vector<std::size_t> picks;
  for (std::size_t j = 0; j < d.rank; ++j)
    for (std::size_t deg = dmin; deg < d.trunc; ++deg) picks.push_back(d.idx(j, deg));
  QMat cols(d.dim(), picks.size());
  for (std::size_t c = 0; c < picks.size(); ++c) cols.at(picks[c], c) = 1;
  return cols;
}

// column spans agree once coordinates of t-degree >= dmin are adjoined
inline bool same_colspace_mod_tail(const TorsionModule& d, const QMat& a, const QMat& b,
                                   std::size_t dmin) {
  QMat tail = tail_coordinates(d, dmin);
  return QMat::same_colspace(QMat::hstack(a, tail), QMat::hstack(b, tail));
}

inline TranslatedModule tensor_vk(const TorsionModule& d, unsigned k, const Rational& alpha) {
  if (d.trunc < static_cast<std::size_t>(k) + 3)
    throw std::invalid_argument("tensor_vk: truncation too small for this k");
  Gl2Structure bg = attach_gl2(d, alpha);
  SymPower sym = make_symk(k);
  std::size_t nd = d.dim(), dimt = nd * (k + 1);
  auto tidx = [&](std::size_t slot, std::size_t m) { return slot * nd + m; };
  QMat idv = QMat::identity(k + 1), idd = QMat::identity(nd);
  Gl2Mats g{kron(idv, bg.h) + kron(sym.h, idd), kron(idv, bg.up) + kron(sym.up, idd),
            kron(idv, bg.um) + kron(sym.um, idd), kron(idv, bg.z) + kron(sym.z, idd)};

  // (c v)_i = 4 u- v_{i-1} + 4(i+1)(k-i) u+ v_{i+1} + (2(2i-k) h + central) v_i
  // with v_{-1} = v_{k+1} = 0; central part is the sum of the two exact
  // casimir scalars of the factors.
  QMat cb(dimt, dimt);
  Rational central = alpha * alpha - 1 + Rational(static_cast<long>(k) * (k + 2));
  auto add_block = [&](std::size_t si, std::size_t sj, const QMat& blk) {
    for (std::size_t r = 0; r < nd; ++r)
      for (std::size_t c = 0; c < nd; ++c)
        if (blk.at(r, c) != 0) cb.at(tidx(si, r), tidx(sj, c)) += blk.at(r, c);
  };
  for (unsigned i = 0; i <= k; ++i) {
    long diag = 2 * (2 * static_cast<long>(i) - static_cast<long>(k));
    add_block(i, i, bg.h * Rational(diag) + idd * central);
    if (i >= 1) add_block(i, i - 1, bg.um * Rational(4));
    if (i < k)
      add_block(i, i + 1,
                bg.up * Rational(4 * static_cast<long>(i + 1) *
                                 static_cast<long>(k - i)));
  }

  TranslatedModule tm{d,
                      k,
                      alpha,
                      std::move(bg),
                      kron(idv, d.t_op()) + kron(sym.up, idd),
                      kron(idv, d.nabla_op()) + kron(sym.nabla(), idd),
                      d.phi_mat ? std::optional<QMat>(kron(sym.phi_matrix(d.prime), d.phi_op()))
                                : std::nullopt,
                      std::move(g),
                      QMat(dimt, dimt),
                      std::move(cb)};
  tm.casimir_pbw = evaluate(uea_casimir(), tm.gl2);

  // the two constructions may only differ where the down-shift in u- has
  // discarded the top t-degree of the D factor
  for (std::size_t slot = 0; slot <= k; ++slot)
    for (std::size_t j = 0; j < d.rank; ++j)
      for (std::size_t deg = 0; deg + 1 < d.trunc; ++deg) {
        std::size_t row = tm.tidx(slot, d.idx(j, deg));
        for (std::size_t col = 0; col < tm.dim(); ++col)
          if (tm.casimir_pbw.at(row, col) != tm.casimir_blocks.at(row, col))
            throw std::logic_error(
                "tensor_vk: casimir constructions disagree at entry (" +
                std::to_string(row) + "," + std::to_string(col) + ")");
      }

  // graded pieces of the slot filtration must match the t-power twists
  auto block_of = [&](const QMat& m, std::size_t si, std::size_t sj) {
    QMat blk(nd, nd);
    for (std::size_t r = 0; r < nd; ++r)
      for (std::size_t c = 0; c < nd; ++c) blk.at(r, c) = m.at(tm.tidx(si, r), tm.tidx(sj, c));
    return blk;
  };
  for (unsigned i = 0; i <= k; ++i) {
    TorsionModule tw = twist_by_t(d, i);
    if (block_of(tm.t_action, i, i) != d.t_op() ||
        block_of(tm.nabla, i, i) != tw.nabla_op() ||
        (i < k && block_of(tm.t_action, i + 1, i) != idd))
      throw std::logic_error("tensor_vk: slot filtration does not grade into twists");
    if (tm.phi && block_of(*tm.phi, i, i) != tw.phi_op())
      throw std::logic_error("tensor_vk: slot filtration does not grade into twists");
  }
  return tm;
}

inline QMat generalized_eigenspace(const TranslatedModule& tm, const Rational& mu, unsigned m) {
  QMat shifted = tm.casimir_pbw - QMat::identity(tm.dim()) * mu;
  return shifted.pow(m).kernel();
}

// The quotient of the tensor by the image of t^{N'}, N' the usable
// precision. It is free of rank rank(D)*(k+1) over the length-N' truncated
// ring: generator orbit columns T^deg (b_j (x) X^i e) together with the
// stabilized torsion complement form an exact basis, and every structure
// map passes to the quotient as a module operator.
struct FreeModel {
  TorsionModule module;  // the induced torsion module on the quotient
  QMat basis;            // [generator orbits | torsion complement]
  std::size_t wcols = 0;
  QMat to_free;          // quotient map: tensor coordinates -> module coordinates
  QMat casimir;          // induced casimir (both constructions, verified equal)
};

inline FreeModel free_model(const TranslatedModule& tm) {
  const TorsionModule& d = tm.base;
  std::size_t np = tm.usable(), dimt = tm.dim();
  std::size_t rr = d.rank * (tm.k + 1);
  SymPower sym = make_symk(tm.k);

  // generator orbit: T^deg (b_j (x) X^i e), slot-major component order
  std::vector<QMat> xie;
  QMat cur(tm.k + 1, 1);
  cur.at(0, 0) = 1;
  for (unsigned i = 0; i <= tm.k; ++i) {
    xie.push_back(cur);
    cur = sym.X * cur;
  }
  std::size_t wcols = rr * np;
  QMat w(dimt, wcols);
  for (unsigned i = 0; i <= tm.k; ++i)
    for (std::size_t j = 0; j < d.rank; ++j) {
      std::size_t comp = i * d.rank + j;
      QMat x(dimt, 1);
      for (std::size_t s = 0; s <= tm.k; ++s) x.at(tm.tidx(s, d.idx(j, 0)), 0) = xie[i].at(s, 0);
      for (std::size_t deg = 0; deg < np; ++deg) {
        for (std::size_t r = 0; r < dimt; ++r) w.at(r, comp * np + deg) = x.at(r, 0);
        x = tm.t_action * x;
      }
    }

  // torsion complement: image of T^{N'}, closed under all structure maps
  QMat z = tm.t_action.pow(np).col_basis();
  for (;;) {
    QMat grown = QMat::hstack(QMat::hstack(tm.t_action * z, tm.nabla * z),
                              QMat::hstack(tm.casimir_pbw * z, tm.casimir_blocks * z));
    if (tm.phi) grown = QMat::hstack(grown, *tm.phi * z);
    QMat next = QMat::sum_cols(z, grown);
    if (next.cols() == z.cols()) break;
    z = next;
  }

  QMat b = QMat::hstack(w, z);
  if (b.cols() != dimt)
    throw std::logic_error("free_model: generator orbits and torsion complement do not fill the space");
  auto binv = b.inverse();
  if (!binv) throw std::logic_error("free_model: basis is singular");

  auto induced = [&](const QMat& op) {
    QMat m = *binv * (op * b);
    for (std::size_t r = 0; r < wcols; ++r)
      for (std::size_t c = wcols; c < dimt; ++c)
        if (m.at(r, c) != 0)
          throw std::logic_error("free_model: torsion complement is not stable");
    QMat top(wcols, wcols);
    for (std::size_t r = 0; r < wcols; ++r)
      for (std::size_t c = 0; c < wcols; ++c) top.at(r, c) = m.at(r, c);
    return top;
  };

  QMat tq = induced(tm.t_action);
  QMat nq = induced(tm.nabla);
  QMat cq = induced(tm.casimir_pbw);
  if (cq != induced(tm.casimir_blocks))
    throw std::logic_error("free_model: casimir constructions disagree in the quotient");

  // t must pass to the exact degree shift
  QMat ts(wcols, wcols);
  for (std::size_t comp = 0; comp < rr; ++comp)
    for (std::size_t deg = 0; deg + 1 < np; ++deg) ts.at(comp * np + deg + 1, comp * np + deg) = 1;
  if (tq != ts) throw std::logic_error("free_model: induced t-action is not the degree shift");

  // read the connection matrix off the degree-zero generator columns and
  // confirm the whole induced operator is module-linear over it
  auto extract = [&](const QMat& op) {
    SeriesMat a(rr, rr, Coord::T, np);
    for (std::size_t comp = 0; comp < rr; ++comp)
      for (std::size_t comp2 = 0; comp2 < rr; ++comp2) {
        std::vector<Rational> cs(np);
        for (std::size_t deg = 0; deg < np; ++deg) cs[deg] = op.at(comp2 * np + deg, comp * np);
        a.at(comp2, comp) = TruncSeries::from_coeffs(Coord::T, cs, np);
      }
    return a;
  };
  TorsionModule ind{.rank = rr,
                    .trunc = np,
                    .prime = d.prime,
                    .alpha = tm.alpha + Rational(static_cast<long>(tm.k)),
                    .nabla_mat = extract(nq),
                    .phi_mat = std::nullopt,
                    .label = "tensor(" + d.label + ", k=" + std::to_string(tm.k) + ")"};
  if (ind.nabla_op() != nq)
    throw std::logic_error("free_model: induced connection is not module-linear");
  if (tm.phi) {
    QMat fq = induced(*tm.phi);
    ind = with_phi(std::move(ind), extract(fq));
    if (ind.phi_op() != fq)
      throw std::logic_error("free_model: induced Frobenius is not module-semilinear");
    if (cq * fq != fq * cq)
      throw std::logic_error("free_model: induced casimir is not a module endomorphism");
  }
  if (cq * tq != tq * cq || cq * nq != nq * cq)
    throw std::logic_error("free_model: induced casimir is not a module endomorphism");

  QMat to_free(wcols, dimt);
  for (std::size_t r = 0; r < wcols; ++r)
    for (std::size_t c = 0; c < dimt; ++c) to_free.at(r, c) = binv->at(r, c);
  return {std::move(ind), std::move(b), wcols, std::move(to_free), std::move(cq)};
}

// The plain eigenkernel in the quotient can pick up torsion vectors just
// below the truncation boundary: something t kills too early for the casimir
// couplings to see.  Computing the kernel upstairs and pushing it down strips
// them, because upstairs they sit in total degree >= trunc-1 and die under
// to_free.  The pushdown is closed under the module operators so the
// splitting machinery receives an honest submodule.
inline QMat eigenkernel_core(const TranslatedModule& tm, const FreeModel& fm,
                             const Rational& mu) {
  const TorsionModule& ind = fm.module;
  QMat upstairs = (tm.casimir_blocks - QMat::identity(tm.dim()) * mu).kernel();
  QMat core = (fm.to_free * upstairs).col_basis();
  std::vector<QMat> ops{ind.t_op(), ind.nabla_op()};
  if (ind.phi_mat) ops.push_back(ind.phi_op());
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& op : ops) {
      QMat bigger = QMat::sum_cols(core, op * core);
      if (bigger.cols() != core.cols()) {
        core = std::move(bigger);
        grew = true;
      }
    }
  }
  if (!((fm.casimir - QMat::identity(ind.dim()) * mu) * core).is_zero())
    throw std::logic_error("eigenkernel_core: closure escaped the kernel");
  return core;
}

struct SpectralPiece {
  Rational mu;
  std::vector<unsigned> indices;         // slots with (alpha+k-2i)^2-1 == mu
  std::vector<std::size_t> kernel_dims;  // dim ker (c-mu)^m for m = 1.. until stable
  QMat space;                            // stabilized generalized eigenspace
  QMat kernel_core;                      // torsion-free part of ker (c-mu)
  std::vector<Rational> sen_poly;
  bool saturated = false;
  bool semisimple = false;
  SplitVerdict split;
  std::string tag;

  std::size_t dim() const { return space.cols(); }
};

struct SpectralReport {
  TorsionModule module;  // the free quotient the analysis ran on
  Rational alpha;
  unsigned k = 0;
  std::vector<SpectralPiece> pieces;
  std::size_t residual_dim = 0;  // dimension not covered by any candidate
};

namespace translate_detail {

inline TorsionModule weight_model(const Rational& w1, const Rational& w2, std::size_t n,
                                  long p) {
  QMat a(2, 2);
  a.at(0, 0) = w1;
  a.at(1, 1) = w2;
  return TorsionModule{.rank = 2,
                       .trunc = n,
                       .prime = p,
                       .alpha = w2 - w1,
                       .nabla_mat = SeriesMat::constant(a, Coord::T, n),
                       .phi_mat = std::nullopt,
                       .label = "diagonal(" + to_string(w1) + "," + to_string(w2) + ")"};
}

// cheap invariants first (rank, Sen polynomial), conjugation search last
inline std::string tag_piece(const TorsionModule& piece, const TorsionModule& base,
                             const std::vector<unsigned>& idxs, const Rational& alpha,
                             unsigned k, bool semisimple, bool split) {
  std::vector<TorsionModule> cands;
  if (idxs.size() == 1) {
    unsigned i = idxs[0];
    cands.push_back(twist_by_t(base, i));
    if (base.rank == 2 && !base.phi_mat)
      cands.push_back(weight_model(Rational(static_cast<long>(i)),
                                   alpha + Rational(static_cast<long>(k - i)), base.trunc,
                                   base.prime));
  } else {
    TorsionModule acc = twist_by_t(base, idxs[0]);
    for (std::size_t s = 1; s < idxs.size(); ++s)
      acc = direct_sum(acc, twist_by_t(base, idxs[s]));
    cands.push_back(std::move(acc));
  }
  for (const auto& cand : cands)
    if (piece.rank == cand.rank && sen_polynomial(piece) == sen_polynomial(cand) &&
        is_isomorphic(piece, cand))
      return cand.label;
  if (!semisimple && !split) return "non-split self-extension";
  return "unidentified";
}

}  // namespace translate_detail

// Candidate-driven decomposition: the casimir eigenvalues are walked in the
// order (alpha+k-2i)^2-1, i = 0..k, with coincident values merged; whatever
// the candidates fail to cover is reported as residual, never dropped.
inline SpectralReport spectral_decomposition(const TranslatedModule& tm) {
  FreeModel fm = free_model(tm);
  const TorsionModule& ind = fm.module;
  SpectralReport rep{ind, tm.alpha, tm.k, {}, 0};
  std::vector<std::pair<Rational, std::vector<unsigned>>> groups;
  for (unsigned i = 0; i <= tm.k; ++i) {
    Rational off = tm.alpha + Rational(static_cast<long>(tm.k) - 2 * static_cast<long>(i));
    Rational mu = off * off - 1;
    bool merged = false;
    for (auto& g : groups)
      if (g.first == mu) {
        g.second.push_back(i);
        merged = true;
        break;
      }
    if (!merged) groups.push_back({mu, {i}});
  }
  std::size_t covered = 0;
  for (auto& [mu, idxs] : groups) {
    SpectralPiece piece;
    piece.mu = mu;
    piece.indices = idxs;
    QMat shifted = fm.casimir - QMat::identity(ind.dim()) * mu;
    QMat pow = shifted;
    QMat ker = pow.kernel();
    piece.kernel_dims.push_back(ker.cols());
    for (;;) {
      pow = pow * shifted;
      QMat next = pow.kernel();
      if (next.cols() == ker.cols()) break;
      ker = std::move(next);
      piece.kernel_dims.push_back(ker.cols());
    }
    piece.space = std::move(ker);
    if (piece.space.cols() > 0) {
      piece.saturated = saturation_check(ind, piece.space);
      TorsionModule rest = submodule_restriction(ind, piece.space);
      piece.sen_poly = sen_polynomial(rest);
      piece.semisimple = piece.kernel_dims.size() == 1;
      // the splitting question that separates the module shapes is whether
      // the eigenkernel has a stable complement
      piece.kernel_core = eigenkernel_core(tm, fm, mu);
      piece.split = is_module_split(ind, piece.kernel_core);
      piece.tag = translate_detail::tag_piece(rest, truncated(tm.base, ind.trunc), idxs,
                                              tm.alpha, tm.k, piece.semisimple,
                                              piece.split.split());
    } else {
      piece.tag = "empty";
    }
    covered += piece.space.cols();
    rep.pieces.push_back(std::move(piece));
  }
  rep.residual_dim = ind.dim() - covered;
  return rep;
}

// (nabla - k + 1) ... (nabla - 1) nabla
inline QMat nabla_iterate(const TorsionModule& d, unsigned k) {
  QMat acc = QMat::identity(d.dim()), nab = d.nabla_op();
  for (unsigned j = 0; j < k; ++j)
    acc = (nab - QMat::identity(d.dim()) * Rational(static_cast<long>(j))) * acc;
  return acc;
}

// {x : (nabla - i + 1)...(nabla) x in t^i D for all i = 1..k}
inline QMat nabla_condition_submodule(const TorsionModule& d, unsigned k) {
  std::size_t n = d.dim();
  std::size_t nrows = d.rank * (static_cast<std::size_t>(k) * (k + 1)) / 2;
  QMat sys(nrows, n);
  std::size_t row = 0;
  QMat acc = QMat::identity(n), nab = d.nabla_op();
  for (unsigned i = 1; i <= k; ++i) {
    acc = (nab - QMat::identity(n) * Rational(static_cast<long>(i) - 1)) * acc;
    for (std::size_t j = 0; j < d.rank; ++j)
      for (std::size_t deg = 0; deg < i; ++deg) {
        for (std::size_t c = 0; c < n; ++c) sys.at(row, c) = acc.at(d.idx(j, deg), c);
        ++row;
      }
  }
  return sys.kernel();
}

// nabla followed by division by t, defined where nabla lands in t*D
struct PartialMap {
  TorsionModule module;
  QMat op;      // shift-down composed with nabla
  QMat domain;  // column basis of {x : nabla x in t*D}

  QMat apply(const QMat& x) const {
    if (!domain.contains_cols(x)) throw std::domain_error("partial map: vector outside the domain");
    return op * x;
  }

  QMat iterate(unsigned k) const { return op.pow(k); }
};

inline PartialMap partial_operator(const TorsionModule& d) {
  return {d, shift_down_op(d) * d.nabla_op(), nabla_condition_submodule(d, 1)};
}

// Iterated rank-1 translations: starting from M_0 = D, each step tensors
// with V_1 and cuts the casimir eigenspace at (alpha+i)^2-1 inside the
// previous space. The composite of the slot-0 projections maps the final
// space back into D; truncation confines its kernel to total degrees
// >= N-k, and anything below that boundary is a hard failure.
struct EigenChain {
  std::vector<QMat> spaces;  // M_i inside D (x) V_1^(x i), i = 1..k
  QMat composite;            // iterated slot-0 projection onto D
  QMat kernel;               // ker(composite) on the final space
};

inline EigenChain proj0_chain(const TorsionModule& d, unsigned k, const Rational& alpha) {
  Gl2Structure g = attach_gl2(d, alpha);
  SymPower v1 = make_symk(1);
  EigenChain chain;
  Gl2Mats mats = g.mats();
  QMat space = QMat::identity(d.dim());
  chain.composite = QMat::identity(d.dim());
  std::size_t prev = d.dim();
  for (unsigned i = 1; i <= k; ++i) {
    QMat id2 = QMat::identity(2), idp = QMat::identity(prev);
    mats = {kron(id2, mats.h) + kron(v1.h, idp), kron(id2, mats.up) + kron(v1.up, idp),
            kron(id2, mats.um) + kron(v1.um, idp), kron(id2, mats.z) + kron(v1.z, idp)};
    QMat cas = evaluate(uea_casimir(), mats);
    Rational off = alpha + Rational(static_cast<long>(i));
    QMat cut = (cas - QMat::identity(2 * prev) * (off * off - 1)).kernel();
    space = QMat::intersect_cols(kron(id2, space), cut);
    chain.spaces.push_back(space);
    QMat proj(prev, 2 * prev);
    for (std::size_t m = 0; m < prev; ++m) proj.at(m, m) = 1;
    chain.composite = chain.composite * proj;
    prev *= 2;
  }
  QMat in_d = chain.composite * space;
  QMat kappa = in_d.kernel();
  chain.kernel = space * kappa;
  // total degree of an ambient index: V_1 slot bits plus the D t-degree
  auto total_degree = [&](std::size_t idx) {
    std::size_t sum = 0, rest = idx;
    for (unsigned lvl = 0; lvl < k; ++lvl) {
      std::size_t half = d.dim() << (k - 1 - lvl);
      sum += rest / half;
      rest %= half;
    }
    return sum + rest % d.trunc;
  };
  for (std::size_t c = 0; c < chain.kernel.cols(); ++c)
    for (std::size_t r = 0; r < chain.kernel.rows(); ++r)
      if (chain.kernel.at(r, c) != 0 && total_degree(r) + k < d.trunc)
        throw std::logic_error("proj0_chain: kernel below the truncation boundary");
  return chain;
}

}  // namespace phigamma
