#pragma once

#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace panelforge {

/// Strided window into column-major storage.
///
/// A view keeps a pointer to the root allocation together with its offsets
/// into it, so that two views carved out of the same matrix can be tested
/// for overlap. Element (i, j) of the view lives at
/// root[(row_off + i) + (col_off + j) * ld].
template <typename T>
class BasicMatrixView {
 public:
  using value_type = std::remove_const_t<T>;

  BasicMatrixView() = default;
  BasicMatrixView(T* root, std::size_t ld, std::size_t row_off, std::size_t col_off,
                  std::size_t rows, std::size_t cols)
      : root_(root), ld_(ld), row_off_(row_off), col_off_(col_off), rows_(rows), cols_(cols) {}

  // mutable -> const
  template <typename U>
    requires(std::is_const_v<T> && std::is_same_v<std::remove_const_t<T>, U>)
  BasicMatrixView(const BasicMatrixView<U>& other)  // NOLINT(google-explicit-constructor)
      : root_(other.root()),
        ld_(other.ld()),
        row_off_(other.row_off()),
        col_off_(other.col_off()),
        rows_(other.rows()),
        cols_(other.cols()) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t ld() const { return ld_; }
  std::size_t row_off() const { return row_off_; }
  std::size_t col_off() const { return col_off_; }
  T* root() const { return root_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  /// Address of element (0, 0); valid even for empty views.
  T* data() const { return root_ + row_off_ + col_off_ * ld_; }
  T* col(std::size_t j) const { return data() + j * ld_; }

  T& operator()(std::size_t i, std::size_t j) const { return data()[i + j * ld_]; }

  /// Sub-window relative to this view. Throws std::out_of_range when the
  /// requested rectangle leaves the view.
  BasicMatrixView sub(std::size_t i, std::size_t j, std::size_t rows, std::size_t cols) const {
    if (i > rows_ || j > cols_ || rows > rows_ - i || cols > cols_ - j) {
      throw std::out_of_range("MatrixView::sub: window exceeds parent view");
    }
    return BasicMatrixView(root_, ld_, row_off_ + i, col_off_ + j, rows, cols);
  }

  BasicMatrixView cols_range(std::size_t j, std::size_t count) const { return sub(0, j, rows_, count); }
  BasicMatrixView rows_range(std::size_t i, std::size_t count) const { return sub(i, 0, count, cols_); }

 private:
  T* root_ = nullptr;
  std::size_t ld_ = 1;
  std::size_t row_off_ = 0;
  std::size_t col_off_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

using MatrixView = BasicMatrixView<double>;
using ConstMatrixView = BasicMatrixView<const double>;

/// True when the two index rectangles intersect inside the same root storage.
/// Empty views never overlap anything.
template <typename T, typename U>
bool overlaps(const BasicMatrixView<T>& a, const BasicMatrixView<U>& b) {
  if (a.empty() || b.empty()) return false;
  if (static_cast<const void*>(a.root()) != static_cast<const void*>(b.root())) return false;
  const bool rows_disjoint = a.row_off() + a.rows() <= b.row_off() || b.row_off() + b.rows() <= a.row_off();
  const bool cols_disjoint = a.col_off() + a.cols() <= b.col_off() || b.col_off() + b.cols() <= a.col_off();
  return !(rows_disjoint || cols_disjoint);
}

/// Owning column-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, rows) {}
  Matrix(std::size_t rows, std::size_t cols, std::size_t ld)
      : rows_(rows), cols_(cols), ld_(ld == 0 ? 1 : ld) {
    if (ld_ < rows_) throw std::invalid_argument("Matrix: leading dimension smaller than row count");
    data_.assign(ld_ * cols_, 0.0);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Deep copy of an arbitrary view into a tightly packed matrix.
  static Matrix from(ConstMatrixView v) {
    Matrix m(v.rows(), v.cols());
    for (std::size_t j = 0; j < v.cols(); ++j)
      for (std::size_t i = 0; i < v.rows(); ++i) m(i, j) = v(i, j);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t ld() const { return ld_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i + j * ld_]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i + j * ld_]; }

  MatrixView view() { return MatrixView(data_.data(), ld_, 0, 0, rows_, cols_); }
  ConstMatrixView view() const { return ConstMatrixView(data_.data(), ld_, 0, 0, rows_, cols_); }
  ConstMatrixView cview() const { return view(); }

  /// Bitwise comparison of the logical elements (padding rows ignored).
  friend bool bitwise_equal(const Matrix& a, const Matrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t ld_ = 1;
  std::vector<double> data_;
};

bool bitwise_equal(const Matrix& a, const Matrix& b);
bool bitwise_equal(ConstMatrixView a, ConstMatrixView b);

double frobenius_norm(ConstMatrixView a);

}  // namespace panelforge
