#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gp {

/// Dense row-major matrix of 32-bit floats. Entries are required to be finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f);
  /// Takes ownership of `data`; throws NumericalError on NaN/Inf and
  /// std::invalid_argument on a length mismatch.
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  const std::vector<float>& storage() const { return data_; }

  bool all_finite() const;
  /// Throws NumericalError naming `what` if any entry is NaN/Inf.
  void require_finite(const char* what) const;

  void fill(float v);
  void resize(std::size_t rows, std::size_t cols);

  /// Rows gathered in the given order.
  Matrix gather_rows(std::span<const std::size_t> indices) const;
  /// Columns [begin, begin+count).
  Matrix col_block(std::size_t begin, std::size_t count) const;

  static Matrix identity(std::size_t n);
  static Matrix hconcat(const Matrix& left, const Matrix& right);
  static Matrix vconcat(std::span<const Matrix> blocks);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// GEMM kernels (Eigen-backed). `out` is resized as needed.
/// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);

/// Mean and standard deviation of all entries, accumulated in double.
double mean_of(std::span<const float> v);
double stddev_of(std::span<const float> v);
/// Population standard deviation over the entries of every matrix.
double global_stddev(std::span<const Matrix> blocks);

}  // namespace gp
