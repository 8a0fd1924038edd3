#include "factorcov/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace factorcov {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch");
  }
}

void require_nonempty(const Matrix& a, const char* op) {
  if (a.empty()) throw DimensionError(std::string(op) + ": empty matrix");
}

// Householder reduction of the symmetric matrix held in v to tridiagonal
// form. On return d holds the diagonal, e the subdiagonal (e[0] = 0) and
// v the accumulated orthogonal transformation.
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);

    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) {
          v(k, j) -= (f * e[k] + g * d[k]);
        }
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate transformations.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL iteration on the tridiagonal (d, e), updating v.
void tridiagonal_ql(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  constexpr int kMaxSweeps = 60;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;

    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > kMaxSweeps) {
          throw NumericError("sym_eigen: QL iteration did not converge", std::abs(e[l]));
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          const std::size_t i = ii;
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymmetricMatrix::SymmetricMatrix(std::size_t dim, double fill) : values_(dim, dim, fill) {
  if (dim == 0) throw DimensionError("SymmetricMatrix: dimension must be at least 1");
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
  SymmetricMatrix s(dim);
  for (std::size_t j = 0; j < dim; ++j) s.set(j, j, 1.0);
  return s;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> values) {
  SymmetricMatrix s(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) s.set(j, j, values[j]);
  return s;
}

SymmetricMatrix SymmetricMatrix::from_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("SymmetricMatrix: input is not square");
  if (m.empty()) throw DimensionError("SymmetricMatrix: dimension must be at least 1");
  Matrix v = m;
  for (std::size_t j = 0; j < v.rows(); ++j) {
    for (std::size_t l = j + 1; l < v.cols(); ++l) v(l, j) = v(j, l);
  }
  return SymmetricMatrix(std::move(v));
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("multiply_transposed: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      c(i, j) = std::inner_product(ar.begin(), ar.end(), br.begin(), 0.0);
    }
  }
  return c;
}

Matrix transposed_multiply(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("transposed_multiply: inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto ar = a.row(k);
    const auto br = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ar[i];
      auto out = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aki * br[j];
    }
  }
  return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix c = a;
  for (double& x : c.data()) x *= factor;
  return c;
}

SymmetricMatrix subtract(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  return SymmetricMatrix::from_upper(subtract(a.matrix(), b.matrix()));
}

SymmetricMatrix add(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  return SymmetricMatrix::from_upper(add(a.matrix(), b.matrix()));
}

SymmetricMatrix scaled_gram(const Matrix& a, double divisor) {
  require_nonempty(a, "scaled_gram");
  SymmetricMatrix g(a.rows());
  for (std::size_t j = 0; j < a.rows(); ++j) {
    const auto rj = a.row(j);
    for (std::size_t l = j; l < a.rows(); ++l) {
      const auto rl = a.row(l);
      g.set(j, l, std::inner_product(rj.begin(), rj.end(), rl.begin(), 0.0) / divisor);
    }
  }
  return g;
}

double trace(const SymmetricMatrix& a) {
  double t = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) t += a(j, j);
  return t;
}

double max_norm(const Matrix& a) {
  require_nonempty(a, "max_norm");
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

double max_norm(const SymmetricMatrix& a) { return max_norm(a.matrix()); }

double frobenius_norm(const Matrix& a) {
  require_nonempty(a, "frobenius_norm");
  require_finite(a, "frobenius_norm");
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const SymmetricMatrix& a) { return frobenius_norm(a.matrix()); }

double operator_norm(const SymmetricMatrix& a) {
  const auto eig = sym_eigen(a);
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

void apply_sign_convention(std::span<double> v) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  }
  if (!v.empty() && v[arg] < 0) {
    for (double& x : v) x = -x;
  }
}

EigenDecomposition sym_eigen(const SymmetricMatrix& a) {
  require_finite(a.matrix(), "sym_eigen");
  const std::size_t n = a.dim();
  Matrix v = a.matrix();
  std::vector<double> d(n);
  std::vector<double> e(n);
  tridiagonalize(v, d, e);
  tridiagonal_ql(v, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = d[src];
    for (std::size_t r = 0; r < n; ++r) col[r] = v(r, src);
    apply_sign_convention(col);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = col[r];
  }
  return out;
}

SymmetricMatrix reconstruct(const EigenDecomposition& eig, std::size_t first,
                            std::size_t last) {
  const std::size_t n = eig.vectors.rows();
  if (first > last || last > eig.values.size()) {
    throw ArgumentError("reconstruct: eigen index range out of bounds");
  }
  Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto vj = eig.vectors.row(j);
    for (std::size_t l = j; l < n; ++l) {
      const auto vl = eig.vectors.row(l);
      double s = 0.0;
      for (std::size_t c = first; c < last; ++c) s += eig.values[c] * vj[c] * vl[c];
      out(j, l) = s;
    }
  }
  return SymmetricMatrix::from_upper(out);
}

SymmetricMatrix reconstruct(const EigenDecomposition& eig) {
  return reconstruct(eig, 0, eig.values.size());
}

Matrix cholesky(const SymmetricMatrix& a) {
  const std::size_t n = a.dim();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      throw NumericError("cholesky: matrix is not positive definite", diag);
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

void require_finite(const Matrix& a, const char* what) {
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace factorcov
