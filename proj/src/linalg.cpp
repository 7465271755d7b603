#include "hypclass/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hypclass/error.hpp"

namespace hypclass {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorKind::Domain, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

std::vector<double> Matrix::row(std::size_t i) const {
  return std::vector<double>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
}

std::vector<double> Matrix::col(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_col(std::size_t j, const std::vector<double>& v) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::norm_fro() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorKind::Domain, "matrix product dimension mismatch");
  Matrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

std::vector<double> operator*(const Matrix& a, const std::vector<double>& v) {
  std::vector<double> out(a.rows_, 0.0);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

namespace {

// Hestenes one-sided Jacobi on a tall (m >= n) matrix.
Svd jacobi_svd_tall(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  const double eps = std::numeric_limits<double>::epsilon();
  double fro2 = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) fro2 += a(i, j) * a(i, j);
  if (!std::isfinite(fro2)) throw Error(ErrorKind::Domain, "SVD of a matrix with non-finite entries");
  // Columns below this squared norm are numerically zero; rotating them only
  // shuffles rounding noise and can keep the sweep alive forever.
  const double negligible = fro2 * 1e-40;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || alpha <= negligible || beta <= negligible ||
            std::abs(gamma) <= eps * std::sqrt(alpha) * std::sqrt(beta))
          continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
    if (sweep == 79) throw Error(ErrorKind::Convergence, "Jacobi SVD did not converge");
  }
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });
  Svd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t j = order[k];
    out.sigma[k] = sigma[j];
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = sigma[j] > 0.0 ? u(i, j) / sigma[j] : 0.0;
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
  }
  return out;
}

}  // namespace

Svd svd(const Matrix& a) {
  if (a.rows() >= a.cols()) return jacobi_svd_tall(a);
  // Pad with zero rows so V is a full basis of R^n.
  Matrix padded(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) padded(i, j) = a(i, j);
  Svd full = jacobi_svd_tall(padded);
  Svd out{full.u.block(0, 0, a.rows(), a.cols()), full.sigma, full.v};
  return out;
}

RankInfo numeric_rank(const std::vector<double>& sigma, double rel_cutoff) {
  RankInfo info;
  double smax = sigma.empty() ? 0.0 : *std::max_element(sigma.begin(), sigma.end());
  if (smax == 0.0) return info;
  for (double s : sigma) {
    double ratio = s / smax;
    if (ratio > rel_cutoff) ++info.rank;
    if (ratio >= 1e-11 && ratio <= 1e-7) info.ambiguous = true;
  }
  return info;
}

RankInfo numeric_rank(const Matrix& a, double rel_cutoff) {
  if (a.rows() == 0 || a.cols() == 0) return {};
  return numeric_rank(svd(a).sigma, rel_cutoff);
}

Matrix null_space(const Matrix& a, double rel_cutoff) {
  Svd s = svd(a);
  std::size_t n = a.cols();
  int rank = numeric_rank(s.sigma, rel_cutoff).rank;
  Matrix out(n, n - rank);
  for (std::size_t k = rank; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) out(i, k - rank) = s.v(i, k);
  return out;
}

Matrix range_space(const Matrix& a, double rel_cutoff) {
  Svd s = svd(a);
  int rank = numeric_rank(s.sigma, rel_cutoff).rank;
  return s.u.block(0, 0, a.rows(), rank);
}

Lu::Lu(const Matrix& a) : lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::Domain, "LU needs a square matrix");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), 0);
  scale_ = a.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    double d = lu_(k, k);
    if (d == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = lu_(i, k) / d;
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

bool Lu::singular(double rel_tol) const {
  for (std::size_t i = 0; i < lu_.rows(); ++i)
    if (std::abs(lu_(i, i)) <= rel_tol * scale_) return true;
  return lu_.rows() > 0 && scale_ == 0.0;
}

double Lu::det() const {
  double d = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

std::vector<double> Lu::solve(const std::vector<double>& b) const {
  const std::size_t n = lu_.rows();
  if (singular()) throw Error(ErrorKind::SingularBlock, "singular matrix in linear solve");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
    y[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * y[j];
    y[i] = s / lu_(i, i);
  }
  return y;
}

Matrix Lu::solve(const Matrix& b) const {
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) x.set_col(j, solve(b.col(j)));
  return x;
}

double det(const Matrix& a) {
  if (a.rows() == 0) return 1.0;
  return Lu(a).det();
}

std::vector<double> solve(const Matrix& a, const std::vector<double>& b) { return Lu(a).solve(b); }

std::vector<double> least_squares(const Matrix& a, const std::vector<double>& b, double rel_cutoff) {
  Svd s = svd(a);
  std::size_t n = a.cols();
  std::vector<double> x(n, 0.0);
  double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
  for (std::size_t k = 0; k < s.sigma.size(); ++k) {
    if (smax == 0.0 || s.sigma[k] <= rel_cutoff * smax) break;
    double coef = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) coef += s.u(i, k) * b[i];
    coef /= s.sigma[k];
    for (std::size_t i = 0; i < n; ++i) x[i] += coef * s.v(i, k);
  }
  return x;
}

std::vector<double> charpoly(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  Matrix m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix next = a * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[k - 1];
    m = next;
    Matrix am = a * m;
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    c[k] = -tr / static_cast<double>(k);
  }
  return c;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Matrix complete_orthonormal_rows(const std::vector<std::vector<double>>& rows, std::size_t d) {
  std::vector<std::vector<double>> basis = rows;
  for (std::size_t j = 0; j < d && basis.size() < d; ++j) {
    std::vector<double> v(d, 0.0);
    v[j] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        double c = dot(q, v);
        for (std::size_t i = 0; i < d; ++i) v[i] -= c * q[i];
      }
    double nv = norm2(v);
    if (nv < 1e-8) continue;
    for (double& x : v) x /= nv;
    basis.push_back(v);
  }
  if (basis.size() != d) throw Error(ErrorKind::Degenerate, "could not complete an orthonormal basis");
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = basis[i][j];
  return out;
}

double hausdorff(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](const auto& p, const auto& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace hypclass
