#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace regstyle::linalg {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  Matrix transposed() const;
  Matrix operator*(const Matrix& rhs) const;

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps over all
/// (p, q) pairs in row order until the off-diagonal Frobenius norm drops
/// below `tolerance`. Eigenpairs are returned sorted by descending value,
/// ties by original diagonal position.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-10, int max_sweeps = 100);

/// Kaiser varimax rotation of the columns of `loadings` with row
/// normalization. Returns the rotated loadings; the rotation matrix is
/// written to `rotation` when provided.
Matrix varimax(const Matrix& loadings, Matrix* rotation = nullptr, double tolerance = 1e-10,
               int max_iterations = 500);

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
double varimax_criterion(const Matrix& loadings);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace regstyle::linalg
