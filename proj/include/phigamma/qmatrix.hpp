#pragma once

// Dense matrices over Q with exact elimination. Pivoting is first-nonzero
// (there is no useful magnitude order on exact rationals) and everything the
// project needs from linear algebra lives here: RREF, kernels, solving,
// inverses, characteristic polynomials, and column-space lattice operations.
// Sizes stay small (a few hundred rows at the very worst), so a dense O(n^3)
// implementation is the right trade.

#include <phigamma/rational.hpp>

#include <cassert>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace phigamma {

class QMat {
 public:
  QMat() : rows_(0), cols_(0) {}
  QMat(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, Rational(0)) {}

  static QMat identity(std::size_t n) {
    QMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  static QMat diag(const std::vector<Rational>& v) {
    QMat m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m.at(i, i) = v[i];
    return m;
  }

  static QMat col_vector(const std::vector<Rational>& v) {
    QMat m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m.at(i, 0) = v[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& at(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return a_[i * cols_ + j];
  }
  const Rational& at(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return a_[i * cols_ + j];
  }

  bool operator==(const QMat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }
  bool operator!=(const QMat& o) const { return !(*this == o); }

  bool is_zero() const {
    for (const auto& x : a_)
      if (x != 0) return false;
    return true;
  }

  QMat operator+(const QMat& o) const {
    check_same_shape(o);
    QMat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
    return r;
  }

  QMat operator-(const QMat& o) const {
    check_same_shape(o);
    QMat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
    return r;
  }

  QMat operator-() const {
    QMat r = *this;
    for (auto& x : r.a_) x = -x;
    return r;
  }

  QMat operator*(const QMat& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("QMat::mul: shape mismatch");
    QMat r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const Rational& aik = at(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) {
          const Rational& bkj = o.at(k, j);
          if (bkj != 0) r.at(i, j) += aik * bkj;
        }
      }
    return r;
  }

  QMat operator*(const Rational& s) const {
    QMat r = *this;
    for (auto& x : r.a_) x *= s;
    return r;
  }
  friend QMat operator*(const Rational& s, const QMat& m) { return m * s; }

  QMat transpose() const {
    QMat r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  QMat pow(std::size_t e) const {
    if (rows_ != cols_) throw std::invalid_argument("QMat::pow: not square");
    QMat acc = identity(rows_), base = *this;
    while (e) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  Rational trace() const {
    if (rows_ != cols_) throw std::invalid_argument("QMat::trace: not square");
    Rational s(0);
    for (std::size_t i = 0; i < rows_; ++i) s += at(i, i);
    return s;
  }

  QMat col(std::size_t j) const {
    QMat r(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) r.at(i, 0) = at(i, j);
    return r;
  }

  QMat cols_slice(std::size_t j0, std::size_t j1) const {
    assert(j0 <= j1 && j1 <= cols_);
    QMat r(rows_, j1 - j0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = j0; j < j1; ++j) r.at(i, j - j0) = at(i, j);
    return r;
  }

  static QMat hstack(const QMat& a, const QMat& b) {
    if (a.cols_ == 0) return b;
    if (b.cols_ == 0) return a;
    if (a.rows_ != b.rows_) throw std::invalid_argument("hstack: row mismatch");
    QMat r(a.rows_, a.cols_ + b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t j = 0; j < a.cols_; ++j) r.at(i, j) = a.at(i, j);
      for (std::size_t j = 0; j < b.cols_; ++j) r.at(i, a.cols_ + j) = b.at(i, j);
    }
    return r;
  }

  static QMat vstack(const QMat& a, const QMat& b) {
    if (a.rows_ == 0) return b;
    if (b.rows_ == 0) return a;
    if (a.cols_ != b.cols_) throw std::invalid_argument("vstack: col mismatch");
    QMat r(a.rows_ + b.rows_, a.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) r.at(i, j) = a.at(i, j);
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) r.at(a.rows_ + i, j) = b.at(i, j);
    return r;
  }

  // Reduced row echelon form; pivot column indices appended to *pivots.
  QMat rref(std::vector<std::size_t>* pivots = nullptr) const {
    QMat m = *this;
    std::size_t lead = 0;
    for (std::size_t col = 0; col < cols_ && lead < rows_; ++col) {
      std::size_t piv = lead;
      while (piv < rows_ && m.at(piv, col) == 0) ++piv;
      if (piv == rows_) continue;
      if (piv != lead)
        for (std::size_t j = 0; j < cols_; ++j) std::swap(m.at(piv, j), m.at(lead, j));
      Rational inv = Rational(1) / m.at(lead, col);
      for (std::size_t j = col; j < cols_; ++j) m.at(lead, j) *= inv;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (i == lead) continue;
        Rational f = m.at(i, col);
        if (f == 0) continue;
        for (std::size_t j = col; j < cols_; ++j) m.at(i, j) -= f * m.at(lead, j);
      }
      if (pivots) pivots->push_back(col);
      ++lead;
    }
    return m;
  }

  std::size_t rank() const {
    std::vector<std::size_t> piv;
    rref(&piv);
    return piv.size();
  }

  // Columns form a basis of ker(this).
  QMat kernel() const {
    std::vector<std::size_t> piv;
    QMat r = rref(&piv);
    std::vector<bool> is_pivot(cols_, false);
    for (auto p : piv) is_pivot[p] = true;
    std::size_t nfree = cols_ - piv.size();
    QMat k(cols_, nfree);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_pivot[j]) continue;
      k.at(j, idx) = 1;
      for (std::size_t pi = 0; pi < piv.size(); ++pi) k.at(piv[pi], idx) = -r.at(pi, j);
      ++idx;
    }
    return k;
  }

  // One solution X of this*X = B (free variables set to zero), or nullopt.
  std::optional<QMat> solve(const QMat& b) const {
    if (b.rows_ != rows_) throw std::invalid_argument("solve: rhs row mismatch");
    std::vector<std::size_t> piv;
    QMat r = hstack(*this, b).rref(&piv);
    for (auto p : piv)
      if (p >= cols_) return std::nullopt;  // pivot in the rhs block: inconsistent
    QMat x(cols_, b.cols_);
    for (std::size_t pi = 0; pi < piv.size(); ++pi)
      for (std::size_t j = 0; j < b.cols_; ++j) x.at(piv[pi], j) = r.at(pi, cols_ + j);
    return x;
  }

  std::optional<QMat> inverse() const {
    if (rows_ != cols_) return std::nullopt;
    auto x = solve(identity(rows_));
    if (!x) return std::nullopt;
    if ((*this) * *x != identity(rows_)) return std::nullopt;  // was rank-deficient
    return x;
  }

  bool is_invertible() const { return rows_ == cols_ && rank() == rows_; }

  // Characteristic polynomial det(T*I - A), monic, returned as coefficients
  // c[0] + c[1] T + ... + c[n] T^n (Faddeev-LeVerrier; division-free in spirit,
  // exact here).
  std::vector<Rational> char_poly() const {
    if (rows_ != cols_) throw std::invalid_argument("char_poly: not square");
    std::size_t n = rows_;
    std::vector<Rational> c(n + 1, Rational(0));
    c[n] = 1;
    QMat m = identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
      m = (*this) * m;
      Rational ck = -m.trace() / Rational(static_cast<long>(k));
      c[n - k] = ck;
      for (std::size_t i = 0; i < n; ++i) m.at(i, i) += ck;
    }
    return c;
  }

  Rational det() const {
    auto c = char_poly();
    return (rows_ % 2 == 0) ? c[0] : -c[0];
  }

  // ---- column-space (subspace) operations; a subspace is "columns of" ----

  // Canonical basis of the column space: rref computed on the transpose,
  // nonzero rows transposed back. Equal subspaces give equal matrices.
  QMat col_basis() const {
    QMat r = transpose().rref();
    std::size_t nz = 0;
    for (std::size_t i = 0; i < r.rows(); ++i) {
      bool zero = true;
      for (std::size_t j = 0; j < r.cols(); ++j)
        if (r.at(i, j) != 0) { zero = false; break; }
      if (!zero) ++nz;
    }
    QMat b(rows_, nz);
    for (std::size_t i = 0; i < nz; ++i)
      for (std::size_t j = 0; j < rows_; ++j) b.at(j, i) = r.at(i, j);
    return b;
  }

  // colspace(other) subset of colspace(this)?
  bool contains_cols(const QMat& other) const {
    if (other.cols() == 0) return true;
    return solve(other).has_value();
  }

  static bool same_colspace(const QMat& a, const QMat& b) {
    return a.contains_cols(b) && b.contains_cols(a);
  }

  static QMat sum_cols(const QMat& a, const QMat& b) { return hstack(a, b).col_basis(); }

  // Zassenhaus-style: ker[A | -B] gives the pairs (x, y) with Ax = By.
  static QMat intersect_cols(const QMat& a, const QMat& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("intersect_cols: row mismatch");
    QMat k = hstack(a, -b).kernel();
    QMat top(a.cols(), k.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
      for (std::size_t j = 0; j < k.cols(); ++j) top.at(i, j) = k.at(i, j);
    return (a * top).col_basis();
  }

 private:
  void check_same_shape(const QMat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("QMat: shape mismatch");
  }

  std::size_t rows_, cols_;
  std::vector<Rational> a_;
};

// {x : op*x in colspace(s)}, as a column basis.
inline QMat preimage_cols(const QMat& op, const QMat& s) {
  if (op.rows() != s.rows()) throw std::invalid_argument("preimage_cols: row mismatch");
  QMat k = QMat::hstack(op, -s).kernel();
  QMat top(op.cols(), k.cols());
  for (std::size_t i = 0; i < op.cols(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) top.at(i, j) = k.at(i, j);
  return top.col_basis();
}

// op in the coordinates of an invariant subspace: basis * r = op * basis.
// Empty result when the subspace is not actually invariant.
inline std::optional<QMat> restricted_matrix(const QMat& op, const QMat& basis) {
  return basis.solve(op * basis);
}

// Kronecker product; block (i,j) is a(i,j) * b.
inline QMat kron(const QMat& a, const QMat& b) {
  QMat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a.at(i, j) == 0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          r.at(i * b.rows() + k, j * b.cols() + l) = a.at(i, j) * b.at(k, l);
    }
  return r;
}

// Evaluate a coefficient-vector polynomial at a rational point.
inline Rational poly_eval(const std::vector<Rational>& p, const Rational& x) {
  Rational acc(0);
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

// Evaluate a coefficient-vector polynomial at a matrix.
inline QMat poly_eval(const std::vector<Rational>& p, const QMat& m) {
  QMat acc(m.rows(), m.cols());
  for (std::size_t i = p.size(); i-- > 0;) {
    acc = acc * m;
    for (std::size_t d = 0; d < m.rows(); ++d) acc.at(d, d) += p[i];
  }
  return acc;
}

}  // namespace phigamma
