#pragma once

// Dense real matrices, symmetric storage, norms and the symmetric
// eigensolver shared by the estimation and simulation layers.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace factorcov {

/// Thrown when operand shapes are empty or do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a caller-supplied parameter is out of its documented range.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown on non-finite input or when an iterative routine fails.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}

  /// Size of the unresolved off-diagonal element (eigensolver) or 0.
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square matrix whose (j,l) and (l,j) entries are the same stored value.
///
/// Construction from a general matrix reflects the upper triangle, and
/// the only mutator writes both mirrored positions, so symmetry holds
/// bit-for-bit at all times.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(std::size_t dim, double fill = 0.0);

  static SymmetricMatrix identity(std::size_t dim);
  static SymmetricMatrix diagonal(std::span<const double> values);
  /// Copies the upper triangle of `m` (including the diagonal) and mirrors it.
  static SymmetricMatrix from_upper(const Matrix& m);

  std::size_t dim() const noexcept { return values_.rows(); }
  double operator()(std::size_t j, std::size_t l) const { return values_(j, l); }
  void set(std::size_t j, std::size_t l, double v) {
    values_(j, l) = v;
    values_(l, j) = v;
  }

  const Matrix& matrix() const noexcept { return values_; }

  bool operator==(const SymmetricMatrix&) const = default;

 private:
  explicit SymmetricMatrix(Matrix values) : values_(std::move(values)) {}
  Matrix values_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues in non-increasing order.
/// Column l of `vectors` pairs with `values[l]`.
struct EigenDecomposition {
  std::vector<double> values;
  Matrix vectors;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);
/// a * b'
Matrix multiply_transposed(const Matrix& a, const Matrix& b);
/// a' * b
Matrix transposed_multiply(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
SymmetricMatrix subtract(const SymmetricMatrix& a, const SymmetricMatrix& b);
SymmetricMatrix add(const SymmetricMatrix& a, const SymmetricMatrix& b);

/// (1/divisor) * a * a', computed one upper-triangle dot product at a time.
SymmetricMatrix scaled_gram(const Matrix& a, double divisor);

double trace(const SymmetricMatrix& a);

double max_norm(const Matrix& a);
double max_norm(const SymmetricMatrix& a);
double frobenius_norm(const Matrix& a);
double frobenius_norm(const SymmetricMatrix& a);
/// Largest absolute eigenvalue, which equals the spectral norm for symmetric input.
double operator_norm(const SymmetricMatrix& a);

/// Householder tridiagonalization followed by implicit-shift QL.
///
/// Every eigenvector is flipped so its entry of largest magnitude is
/// positive (the first such entry wins ties), which makes the output a
/// deterministic function of the input. Repeated eigenvalues only pin
/// down the spanned subspace, not the individual columns.
EigenDecomposition sym_eigen(const SymmetricMatrix& a);

/// Sum of values[l] * v_l v_l' over l in [first, last).
SymmetricMatrix reconstruct(const EigenDecomposition& eig, std::size_t first,
                            std::size_t last);
SymmetricMatrix reconstruct(const EigenDecomposition& eig);

/// Lower-triangular L with L L' = a. Throws NumericError if a is not
/// numerically positive definite.
Matrix cholesky(const SymmetricMatrix& a);

/// Flip `v` in place so its largest-magnitude entry is positive.
void apply_sign_convention(std::span<double> v);

void require_finite(const Matrix& a, const char* what);

}  // namespace factorcov
