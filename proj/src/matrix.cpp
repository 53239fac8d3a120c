#include "graphprobe/matrix.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

#include "graphprobe/error.hpp"

namespace gp {

namespace {

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) { return ConstMap(m.values().data(), m.rows(), m.cols()); }
Map view(Matrix& m) { return Map(m.values().data(), m.rows(), m.cols()); }

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, float fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  require_finite("Matrix construction");
}

bool Matrix::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::require_finite(const char* what) const {
  if (!all_finite()) throw NumericalError(std::string(what) + ": non-finite matrix entry");
}

void Matrix::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

void Matrix::resize(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0f);
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw std::out_of_range("gather_rows: row index out of range");
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::col_block(std::size_t begin, std::size_t count) const {
  if (begin + count > cols_) throw std::out_of_range("col_block: columns out of range");
  Matrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto src = row(r).subspan(begin, count);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0f;
  return m;
}

Matrix Matrix::hconcat(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) throw std::invalid_argument("hconcat: row count mismatch");
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(left.row(r).begin(), left.row(r).end(), dst.begin());
    std::copy(right.row(r).begin(), right.row(r).end(), dst.begin() + left.cols());
  }
  return out;
}

Matrix Matrix::vconcat(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  std::size_t rows = 0;
  const std::size_t cols = blocks.front().cols();
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw std::invalid_argument("vconcat: column count mismatch");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (const auto& b : blocks) {
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + at);
    at += b.size();
  }
  return out;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out.resize(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out.resize(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out.resize(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
}

double mean_of(std::span<const float> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (float x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev_of(std::span<const float> v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (float x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double global_stddev(std::span<const Matrix> blocks) {
  double s = 0.0;
  double n = 0.0;
  for (const auto& b : blocks) {
    for (float x : b.values()) s += x;
    n += static_cast<double>(b.size());
  }
  if (n == 0.0) return 0.0;
  const double m = s / n;
  double ss = 0.0;
  for (const auto& b : blocks) {
    for (float x : b.values()) ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / n);
}

}  // namespace gp
