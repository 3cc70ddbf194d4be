#include "msast/numerics/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "msast/errors.hpp"

namespace msast {

template <class S>
Mat<S> Mat<S>::from_rows(std::initializer_list<std::initializer_list<S>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Mat out(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged initializer for Mat");
    std::copy(row.begin(), row.end(), out.row_ptr(i++));
  }
  return out;
}

template <class S>
Mat<S> Mat<S>::identity(std::size_t n) {
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = S{1};
  return out;
}

template <class S>
void Mat<S>::fill(S v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <class S>
void Mat<S>::resize(std::size_t rows, std::size_t cols, S fill) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, fill);
}

template <class S>
Mat<S> Mat<S>::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) throw ShapeError("slice_rows out of range on " + shape_str());
  Mat out(end - begin, cols_);
  std::copy(row_ptr(begin), row_ptr(begin) + (end - begin) * cols_, out.data());
  return out;
}

template <class S>
bool Mat<S>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](S v) { return std::isfinite(v); });
}

template <class S>
std::string Mat<S>::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

template <class S>
S max_abs_diff(const Mat<S>& a, const Mat<S>& b) {
  require_same_shape(a, b, "max_abs_diff");
  S m{0};
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

template <class S>
void require_same_shape(const Mat<S>& a, const Mat<S>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

template class Mat<float>;
template class Mat<double>;
template float max_abs_diff(const Mat<float>&, const Mat<float>&);
template double max_abs_diff(const Mat<double>&, const Mat<double>&);
template void require_same_shape(const Mat<float>&, const Mat<float>&, const char*);
template void require_same_shape(const Mat<double>&, const Mat<double>&, const char*);

}  // namespace msast
