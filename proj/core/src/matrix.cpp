#include "gresnet/matrix.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace gresnet {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EigenRowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;

ConstMap map_of(const Matrix& m) {
  return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

Map map_of(Matrix& m) {
  return Map(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

[[noreturn]] void throw_shape(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                   b.shape_str());
}

}  // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("from_rows: ragged initializer");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw_shape("matmul", a, b);
  Matrix c(a.rows(), b.cols());
  map_of(c).noalias() = map_of(a) * map_of(b);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw_shape("matmul_tn", a, b);
  Matrix c(a.cols(), b.cols());
  map_of(c).noalias() = map_of(a).transpose() * map_of(b);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw_shape("matmul_nt", a, b);
  // Materializing bT first is measurably faster than the transpose expression
  // for the small right-hand sides seen here.
  Matrix bt = transpose(b);
  Matrix c(a.rows(), b.rows());
  map_of(c).noalias() = map_of(a) * map_of(bt);
  return c;
}

Matrix elementwise(const Matrix& a, const Matrix& b, EwOp op) {
  if (!a.same_shape(b)) throw_shape("elementwise", a, b);
  Matrix c(a.rows(), a.cols());
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  const std::size_t n = a.size();
  switch (op) {
    case EwOp::add:
      for (std::size_t i = 0; i < n; ++i) pc[i] = pa[i] + pb[i];
      break;
    case EwOp::sub:
      for (std::size_t i = 0; i < n; ++i) pc[i] = pa[i] - pb[i];
      break;
    case EwOp::mul:
      for (std::size_t i = 0; i < n; ++i) pc[i] = pa[i] * pb[i];
      break;
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) { return elementwise(a, b, EwOp::add); }
Matrix sub(const Matrix& a, const Matrix& b) { return elementwise(a, b, EwOp::sub); }
Matrix mul(const Matrix& a, const Matrix& b) { return elementwise(a, b, EwOp::mul); }

Matrix scale(const Matrix& a, double s) {
  Matrix c(a.rows(), a.cols());
  const double* pa = a.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < a.size(); ++i) pc[i] = pa[i] * s;
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> col_sum(const Matrix& a) {
  std::vector<double> s(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) s[j] += row[j];
  }
  return s;
}

void add_row_vector(Matrix& a, std::span<const double> v) {
  if (v.size() != a.cols())
    throw ShapeError("add_row_vector: vector length " + std::to_string(v.size()) +
                     " does not match " + a.shape_str());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) row[j] += v[j];
  }
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw_shape("max_abs_diff", a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace gresnet
