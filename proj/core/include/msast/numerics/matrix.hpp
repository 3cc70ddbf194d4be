#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace msast {

/// Dense row-major matrix. Rows are time steps, columns are channels.
template <class S>
class Mat {
 public:
  using value_type = S;

  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, S fill = S{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat from_rows(std::initializer_list<std::initializer_list<S>> rows);
  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  S& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  S operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  S* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const S* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
  std::span<S> row(std::size_t r) { return {row_ptr(r), cols_}; }
  std::span<const S> row(std::size_t r) const { return {row_ptr(r), cols_}; }
  std::span<S> flat() { return data_; }
  std::span<const S> flat() const { return data_; }

  void fill(S v);
  void resize(std::size_t rows, std::size_t cols, S fill = S{0});

  // Copy of rows [begin, end).
  Mat slice_rows(std::size_t begin, std::size_t end) const;

  template <class U>
  Mat<U> cast() const {
    Mat<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;
  std::string shape_str() const;

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> data_;
};

using Matrix = Mat<float>;
using MatrixD = Mat<double>;

template <class S>
S max_abs_diff(const Mat<S>& a, const Mat<S>& b);

// Throws ShapeError naming both shapes unless a and b agree.
template <class S>
void require_same_shape(const Mat<S>& a, const Mat<S>& b, const char* what);

}  // namespace msast
