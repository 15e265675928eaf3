#pragma once

// V_k = Sym^k of the standard representation, in the basis e_i = t^i e where
// e is the lowest weight vector and t acts as u+. In this basis
//   h e_i = (2i-k) e_i,  u+ e_i = e_{i+1},  u- e_i = i(k-i+1) e_{i-1},  z = k.
// The X-action is e^t - 1 with t = u+, nilpotent of exact order k+1, which
// identifies V_k with the quotient of the coefficient ring by X^{k+1}.

#include <phigamma/qmatrix.hpp>
#include <phigamma/rational.hpp>
#include <phigamma/ugl2.hpp>

#include <stdexcept>

namespace phigamma {

struct SymPower {
  unsigned k = 0;
  QMat h, up, um, z, X;

  std::size_t dim() const { return k + 1; }

  Gl2Mats gl2() const { return {h, up, um, z}; }

  // diagonal weight operator: half-sum (z+h)/2, acts as i on e_i
  QMat nabla() const { return (z + h) * rat(1, 2); }

  // Sym^k(g) in the e-basis for upper-triangular g = [[a,b],[0,d]]:
  //   e_i |-> sum_{s>=i} a^i b^{s-i} d^{k-s} / (s-i)!  e_s
  // (the monomial-basis binomial action conjugated by e_i = k!/(k-i)! f1^i f2^{k-i})
  QMat group_matrix(const GL2Elem& g) const {
    if (g.c != 0) throw std::invalid_argument("group_matrix: lower-triangular entry");
    if (g.a == 0 || g.d == 0) throw std::invalid_argument("group_matrix: singular");
    QMat m(k + 1, k + 1);
    for (unsigned i = 0; i <= k; ++i)
      for (unsigned s = i; s <= k; ++s)
        m.at(s, i) = rpow(g.a, i) * rpow(g.b, s - i) * rpow(g.d, k - s) / factorial(s - i);
    return m;
  }

  QMat group_action(const GL2Elem& g, const QMat& v) const { return group_matrix(g) * v; }

  // diag(p,1)-action: e_i |-> p^i e_i, fixing the lowest weight line
  QMat phi_matrix(const Rational& p) const {
    return group_matrix({p, Rational(0), Rational(0), Rational(1)});
  }

  QMat phi_inverse(const QMat& v, const Rational& p) const {
    QMat w = v;
    for (unsigned i = 0; i <= k; ++i)
      for (std::size_t cc = 0; cc < v.cols(); ++cc) w.at(i, cc) = v.at(i, cc) / rpow(p, i);
    return w;
  }
};

inline SymPower make_symk(unsigned k) {
  SymPower s;
  s.k = k;
  std::size_t n = k + 1;
  s.h = QMat(n, n);
  s.up = QMat(n, n);
  s.um = QMat(n, n);
  s.z = QMat::identity(n) * Rational(static_cast<long>(k));
  for (unsigned i = 0; i <= k; ++i) {
    s.h.at(i, i) = Rational(2 * static_cast<long>(i) - static_cast<long>(k));
    if (i < k) s.up.at(i + 1, i) = 1;
    if (i > 0) s.um.at(i - 1, i) = Rational(static_cast<long>(i) * (k - i + 1));
  }
  s.X = QMat(n, n);
  QMat upj = QMat::identity(n);
  for (unsigned j = 1; j <= k; ++j) {
    upj = upj * s.up;
    s.X = s.X + upj * (Rational(1) / factorial(j));
  }
  return s;
}

}  // namespace phigamma
