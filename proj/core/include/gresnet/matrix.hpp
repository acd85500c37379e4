#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gresnet {

/// Thrown when operand shapes do not line up. The message names both shapes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-byte-aligned allocation. Vectorized matrix kernels pick their peeling
/// by the operand addresses modulo the SIMD width; pinning every buffer to
/// one address class keeps results bit-identical across allocations.
template <class T>
struct AlignedAllocator {
  using value_type = T;

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{64}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{64}); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

/// Dense row-major matrix of 64-bit reals, batch-first (rows = samples,
/// cols = features). The one numeric carrier used throughout the library.
class Matrix {
 public:
  Matrix() = default;

  /// rows x cols, zero-filled.
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  Matrix(std::size_t rows, std::size_t cols, double fill)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Build from nested braces: Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// "128x50", for error messages.
  std::string shape_str() const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double, AlignedAllocator<double>> data_;
};

enum class EwOp { add, sub, mul };

/// c = a * b. Throws ShapeError unless a.cols == b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

/// c = aT * b without materializing the transpose (a.rows == b.rows).
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// c = a * bT (a.cols == b.cols).
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Entrywise combine; shapes must match.
Matrix elementwise(const Matrix& a, const Matrix& b, EwOp op);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix mul(const Matrix& a, const Matrix& b);

/// Every entry multiplied by s.
Matrix scale(const Matrix& a, double s);

Matrix transpose(const Matrix& a);

/// Column sums, length a.cols.
std::vector<double> col_sum(const Matrix& a);

/// In-place broadcast add of a length-cols vector to every row (bias add).
void add_row_vector(Matrix& a, std::span<const double> v);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace gresnet
