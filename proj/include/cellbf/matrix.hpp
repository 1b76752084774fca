#pragma once

#include <cassert>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cellbf/rational.hpp"

namespace cellbf {

// Dense exact rational matrix. Row reduction uses a deterministic
// leftmost-pivot rule so all derived bases are reproducible.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, Q(0)) {}
  Mat(std::initializer_list<std::initializer_list<Q>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    a_.reserve(rows_ * cols_);
    for (auto& row : init) {
      if (row.size() != cols_) throw std::invalid_argument("ragged init");
      for (auto& x : row) a_.push_back(x);
    }
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  static Mat zero(std::size_t r, std::size_t c) { return Mat(r, c); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  Q& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Q& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  bool is_zero() const {
    for (auto& x : a_)
      if (x != 0) return false;
    return true;
  }

  friend Mat operator+(const Mat& x, const Mat& y) {
    assert(x.rows_ == y.rows_ && x.cols_ == y.cols_);
    Mat out = x;
    for (std::size_t i = 0; i < out.a_.size(); ++i) out.a_[i] += y.a_[i];
    return out;
  }
  friend Mat operator-(const Mat& x, const Mat& y) {
    assert(x.rows_ == y.rows_ && x.cols_ == y.cols_);
    Mat out = x;
    for (std::size_t i = 0; i < out.a_.size(); ++i) out.a_[i] -= y.a_[i];
    return out;
  }
  friend Mat operator*(const Q& c, const Mat& x) {
    Mat out = x;
    for (auto& v : out.a_) v *= c;
    return out;
  }
  friend Mat operator*(const Mat& x, const Mat& y) {
    if (x.cols_ != y.rows_) throw std::invalid_argument("Mat: shape mismatch in product");
    Mat out(x.rows_, y.cols_);
    for (std::size_t i = 0; i < x.rows_; ++i)
      for (std::size_t k = 0; k < x.cols_; ++k) {
        const Q& xik = x(i, k);
        if (xik == 0) continue;
        for (std::size_t j = 0; j < y.cols_; ++j) {
          const Q& ykj = y(k, j);
          if (ykj != 0) out(i, j) += xik * ykj;
        }
      }
    return out;
  }
  Mat operator-() const {
    Mat out = *this;
    for (auto& v : out.a_) v = -v;
    return out;
  }
  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
  }

  Mat transpose() const {
    Mat out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  std::vector<Q> apply(const std::vector<Q>& v) const {
    assert(v.size() == cols_);
    std::vector<Q> out(rows_, Q(0));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if ((*this)(i, j) != 0) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  Mat col(std::size_t j) const {
    Mat out(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) out(i, 0) = (*this)(i, j);
    return out;
  }

  // Horizontal concatenation.
  static Mat hcat(const Mat& x, const Mat& y) {
    if (x.rows_ != y.rows_) throw std::invalid_argument("hcat: row mismatch");
    Mat out(x.rows_, x.cols_ + y.cols_);
    for (std::size_t i = 0; i < x.rows_; ++i) {
      for (std::size_t j = 0; j < x.cols_; ++j) out(i, j) = x(i, j);
      for (std::size_t j = 0; j < y.cols_; ++j) out(i, x.cols_ + j) = y(i, j);
    }
    return out;
  }

  Q det() const {
    if (rows_ != cols_) throw std::invalid_argument("det: not square");
    Mat m = *this;
    Q d(1);
    std::size_t n = rows_;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      while (piv < n && m(piv, c) == 0) ++piv;
      if (piv == n) return Q(0);
      if (piv != c) {
        for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
        d = -d;
      }
      d *= m(c, c);
      Q inv = Q(1) / m(c, c);
      for (std::size_t i = c + 1; i < n; ++i) {
        if (m(i, c) == 0) continue;
        Q f = m(i, c) * inv;
        for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
      }
    }
    return d;
  }

  std::optional<Mat> inverse() const {
    if (rows_ != cols_) throw std::invalid_argument("inverse: not square");
    std::size_t n = rows_;
    Mat m = *this, inv = identity(n);
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      while (piv < n && m(piv, c) == 0) ++piv;
      if (piv == n) return std::nullopt;
      if (piv != c)
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(m(piv, j), m(c, j));
          std::swap(inv(piv, j), inv(c, j));
        }
      Q f = Q(1) / m(c, c);
      for (std::size_t j = 0; j < n; ++j) {
        m(c, j) *= f;
        inv(c, j) *= f;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == c || m(i, c) == 0) continue;
        Q g = m(i, c);
        for (std::size_t j = 0; j < n; ++j) {
          m(i, j) -= g * m(c, j);
          inv(i, j) -= g * inv(c, j);
        }
      }
    }
    return inv;
  }

  // Reduced row echelon form; returns pivot column indices.
  std::vector<std::size_t> rref() {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
      std::size_t piv = r;
      while (piv < rows_ && (*this)(piv, c) == 0) ++piv;
      if (piv == rows_) continue;
      if (piv != r)
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(piv, j), (*this)(r, j));
      Q f = Q(1) / (*this)(r, c);
      for (std::size_t j = c; j < cols_; ++j) (*this)(r, j) *= f;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (i == r || (*this)(i, c) == 0) continue;
        Q g = (*this)(i, c);
        for (std::size_t j = c; j < cols_; ++j) (*this)(i, j) -= g * (*this)(r, j);
      }
      pivots.push_back(c);
      ++r;
    }
    return pivots;
  }

  std::size_t rank() const {
    Mat m = *this;
    return m.rref().size();
  }

  // Columns spanning the kernel (RREF free-variable basis).
  Mat kernel_basis() const {
    Mat m = *this;
    auto pivots = m.rref();
    std::vector<bool> is_piv(cols_, false);
    for (auto c : pivots) is_piv[c] = true;
    std::size_t nfree = cols_ - pivots.size();
    Mat out(cols_, nfree);
    std::size_t k = 0;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (is_piv[c]) continue;
      out(c, k) = 1;
      for (std::size_t r = 0; r < pivots.size(); ++r) out(pivots[r], k) = -m(r, c);
      ++k;
    }
    return out;
  }

  // Column-space basis: the pivot columns of this matrix.
  Mat image_basis() const {
    Mat m = *this;
    auto pivots = m.rref();
    Mat out(rows_, pivots.size());
    for (std::size_t k = 0; k < pivots.size(); ++k)
      for (std::size_t i = 0; i < rows_; ++i) out(i, k) = (*this)(i, pivots[k]);
    return out;
  }

  // Solves A x = b for one solution; nullopt if inconsistent.
  std::optional<std::vector<Q>> solve(const std::vector<Q>& b) const {
    assert(b.size() == rows_);
    Mat aug(rows_, cols_ + 1);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) aug(i, j) = (*this)(i, j);
      aug(i, cols_) = b[i];
    }
    auto pivots = aug.rref();
    if (!pivots.empty() && pivots.back() == cols_) return std::nullopt;
    std::vector<Q> x(cols_, Q(0));
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, cols_);
    return x;
  }

  // Solves A X = B columnwise; nullopt if any column is inconsistent.
  std::optional<Mat> solve_mat(const Mat& B) const {
    assert(B.rows() == rows_);
    Mat X(cols_, B.cols());
    for (std::size_t j = 0; j < B.cols(); ++j) {
      std::vector<Q> b(rows_);
      for (std::size_t i = 0; i < rows_; ++i) b[i] = B(i, j);
      auto x = solve(b);
      if (!x) return std::nullopt;
      for (std::size_t i = 0; i < cols_; ++i) X(i, j) = (*x)[i];
    }
    return X;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<Q> a_;
};

}  // namespace cellbf
