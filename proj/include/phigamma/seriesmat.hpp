#pragma once

// Matrices over the truncated series ring, used for connection and Frobenius
// matrices of torsion modules. Degreewise slices give the bridge to exact
// E-linear algebra: mult_operator() flattens module-linear action to a QMat.

#include <phigamma/qmatrix.hpp>
#include <phigamma/series.hpp>

#include <stdexcept>
#include <vector>

namespace phigamma {

class SeriesMat {
 public:
  SeriesMat(std::size_t rows, std::size_t cols, Coord coord, std::size_t trunc)
      : rows_(rows), cols_(cols), e_(rows * cols, TruncSeries::zero(coord, trunc)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("SeriesMat: empty shape");
  }

  static SeriesMat identity(std::size_t n, Coord coord, std::size_t trunc) {
    SeriesMat m(n, n, coord, trunc);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = TruncSeries::one(coord, trunc);
    return m;
  }

  static SeriesMat constant(const QMat& q, Coord coord, std::size_t trunc) {
    SeriesMat m(q.rows(), q.cols(), coord, trunc);
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t j = 0; j < q.cols(); ++j)
        m.at(i, j) = TruncSeries::constant(coord, trunc, q.at(i, j));
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Coord coord() const { return e_[0].coord(); }
  std::size_t trunc() const { return e_[0].trunc(); }

  TruncSeries& at(std::size_t r, std::size_t c) { return e_[r * cols_ + c]; }
  const TruncSeries& at(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }

  bool operator==(const SeriesMat& o) const = default;

  bool is_zero() const {
    for (const auto& s : e_)
      if (!s.is_zero()) return false;
    return true;
  }

  SeriesMat operator+(const SeriesMat& o) const {
    check_shape(o);
    SeriesMat r = *this;
    for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = r.e_[i] + o.e_[i];
    return r;
  }

  SeriesMat operator-(const SeriesMat& o) const {
    check_shape(o);
    SeriesMat r = *this;
    for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = r.e_[i] - o.e_[i];
    return r;
  }

  SeriesMat operator*(const SeriesMat& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("SeriesMat: product shape mismatch");
    SeriesMat r(rows_, o.cols_, coord(), std::min(trunc(), o.trunc()));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < o.cols_; ++j) {
        TruncSeries acc = TruncSeries::zero(coord(), std::min(trunc(), o.trunc()));
        for (std::size_t k = 0; k < cols_; ++k) acc = acc + at(i, k) * o.at(k, j);
        r.at(i, j) = acc;
      }
    return r;
  }

  SeriesMat operator*(const Rational& s) const {
    SeriesMat r = *this;
    for (auto& x : r.e_) x = x * s;
    return r;
  }

  SeriesMat operator*(const TruncSeries& s) const {
    SeriesMat r = *this;
    for (auto& x : r.e_) x = x * s;
    return r;
  }

  SeriesMat map(TruncSeries (TruncSeries::*op)() const) const {
    SeriesMat r = *this;
    for (auto& x : r.e_) x = (x.*op)();
    return r;
  }

  SeriesMat nabla() const { return map(&TruncSeries::nabla); }

  SeriesMat phi(long p) const {
    SeriesMat r = *this;
    for (auto& x : r.e_) x = x.phi(p);
    return r;
  }

  SeriesMat truncated(std::size_t m) const {
    SeriesMat r = *this;
    for (auto& x : r.e_) x = x.truncated(m);
    return r;
  }

  QMat coeff_matrix(std::size_t d) const {
    QMat q(rows_, cols_);
    if (d >= trunc()) return q;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) q.at(i, j) = at(i, j).coeffs()[d];
    return q;
  }

  QMat constant_term() const { return coeff_matrix(0); }

  // flatten module-linear multiplication to coordinates (component, degree)
  QMat mult_operator() const {
    std::size_t n = trunc();
    QMat q(rows_ * n, cols_ * n);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        QMat b = at(i, j).mult_matrix();
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t c = 0; c < n; ++c) q.at(i * n + a, j * n + c) = b.at(a, c);
      }
    return q;
  }

  SeriesMat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    SeriesMat b(nr, nc, coord(), trunc());
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b.at(i, j) = at(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const SeriesMat& b) {
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) at(r0 + i, c0 + j) = b.at(i, j);
  }

  // degreewise back-substitution against the constant term
  SeriesMat inverse() const {
    if (rows_ != cols_) throw std::invalid_argument("SeriesMat: inverse of non-square");
    auto b0 = constant_term().inverse();
    if (!b0) throw std::domain_error("SeriesMat: constant term not invertible");
    std::size_t n = trunc();
    std::vector<QMat> slices;
    slices.push_back(*b0);
    for (std::size_t d = 1; d < n; ++d) {
      QMat acc(rows_, rows_);
      for (std::size_t e = 0; e < d; ++e) acc = acc + coeff_matrix(d - e) * slices[e];
      slices.push_back(-(*b0 * acc));
    }
    SeriesMat r(rows_, rows_, coord(), n);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < rows_; ++j) {
        std::vector<Rational> cs(n);
        for (std::size_t d = 0; d < n; ++d) cs[d] = slices[d].at(i, j);
        r.at(i, j) = TruncSeries::from_coeffs(coord(), cs, n);
      }
    return r;
  }

 private:
  void check_shape(const SeriesMat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("SeriesMat: shape mismatch");
  }

  std::size_t rows_, cols_;
  std::vector<TruncSeries> e_;
};

}  // namespace phigamma
