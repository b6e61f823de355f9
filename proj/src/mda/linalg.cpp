#include "regstyle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace regstyle::linalg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("matrix shape mismatch");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      if (a == 0.0) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p) {
    for (std::size_t q = p + 1; q < a.cols(); ++q) sum += 2.0 * a(p, q) * a(p, q);
  }
  return std::sqrt(sum);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw std::invalid_argument("jacobi_eigen: matrix must be square");
  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);
  int sweeps = 0;
  while (sweeps < max_sweeps && off_diagonal_norm(a) >= tolerance) {
    ++sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.sweeps = sweeps;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

double varimax_criterion(const Matrix& loadings) {
  const double p = static_cast<double>(loadings.rows());
  double total = 0.0;
  for (std::size_t c = 0; c < loadings.cols(); ++c) {
    double sum2 = 0.0;
    double sum4 = 0.0;
    for (std::size_t r = 0; r < loadings.rows(); ++r) {
      const double sq = loadings(r, c) * loadings(r, c);
      sum2 += sq;
      sum4 += sq * sq;
    }
    total += sum4 / p - (sum2 / p) * (sum2 / p);
  }
  return total;
}

Matrix varimax(const Matrix& loadings, Matrix* rotation, double tolerance, int max_iterations) {
  const std::size_t p = loadings.rows();
  const std::size_t k = loadings.cols();
  Matrix x = loadings;
  Matrix rot = Matrix::identity(k);

  std::vector<double> h(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    h[r] = norm(x.row(r));
    if (h[r] > 0.0) {
      for (std::size_t c = 0; c < k; ++c) x(r, c) /= h[r];
    }
  }

  const double n = static_cast<double>(p);
  for (int iter = 0; iter < max_iterations && k > 1; ++iter) {
    bool rotated = false;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      for (std::size_t l = j + 1; l < k; ++l) {
        double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
        for (std::size_t r = 0; r < p; ++r) {
          const double u = x(r, j) * x(r, j) - x(r, l) * x(r, l);
          const double v = 2.0 * x(r, j) * x(r, l);
          a += u;
          b += v;
          c += u * u - v * v;
          d += 2.0 * u * v;
        }
        const double num = d - 2.0 * a * b / n;
        const double den = c - (a * a - b * b) / n;
        const double phi = 0.25 * std::atan2(num, den);
        if (std::abs(phi) <= tolerance) continue;
        rotated = true;
        const double cs = std::cos(phi);
        const double sn = std::sin(phi);
        for (std::size_t r = 0; r < p; ++r) {
          const double xj = x(r, j);
          const double xl = x(r, l);
          x(r, j) = cs * xj + sn * xl;
          x(r, l) = -sn * xj + cs * xl;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double rj = rot(r, j);
          const double rl = rot(r, l);
          rot(r, j) = cs * rj + sn * rl;
          rot(r, l) = -sn * rj + cs * rl;
        }
      }
    }
    if (!rotated) break;
  }

  if (rotation != nullptr) *rotation = rot;
  return loadings * rot;
}

}  // namespace regstyle::linalg
