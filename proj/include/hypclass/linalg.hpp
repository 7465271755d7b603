#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hypclass {

// Small dense row-major matrix. Sizes here never exceed a few dozen.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(const std::vector<double>& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const double* data() const { return data_.data(); }

  Matrix transposed() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  std::vector<double> row(std::size_t i) const;
  std::vector<double> col(std::size_t j) const;
  void set_col(std::size_t j, const std::vector<double>& v);
  double max_abs() const;
  double norm_fro() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend std::vector<double> operator*(const Matrix& a, const std::vector<double>& v);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

struct Svd {
  Matrix u;                    // m x k, k = min(m, n)
  std::vector<double> sigma;   // descending
  Matrix v;                    // n x k
};
// One-sided Jacobi; deterministic sweep order.
Svd svd(const Matrix& a);

struct RankInfo {
  int rank = 0;
  bool ambiguous = false;  // some sigma/sigma_max inside [1e-11, 1e-7]
};
inline constexpr double kRankCutoff = 1e-9;
RankInfo numeric_rank(const std::vector<double>& sigma, double rel_cutoff = kRankCutoff);
RankInfo numeric_rank(const Matrix& a, double rel_cutoff = kRankCutoff);

// Orthonormal bases as matrix columns.
Matrix null_space(const Matrix& a, double rel_cutoff = kRankCutoff);
Matrix range_space(const Matrix& a, double rel_cutoff = kRankCutoff);

class Lu {
 public:
  explicit Lu(const Matrix& a);
  bool singular(double rel_tol = 1e-13) const;
  double det() const;
  std::vector<double> solve(const std::vector<double>& b) const;
  Matrix solve(const Matrix& b) const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  double scale_ = 0.0;
};

double det(const Matrix& a);
std::vector<double> solve(const Matrix& a, const std::vector<double>& b);
// Minimum-norm least-squares solution through the SVD.
std::vector<double> least_squares(const Matrix& a, const std::vector<double>& b,
                                  double rel_cutoff = 1e-12);

// Eigenvalues of a general real matrix: balancing, Hessenberg reduction and
// Francis double-shift QR. Throws Convergence after the iteration cap.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

// Monic characteristic polynomial det(lambda I - A) = sum c[k] lambda^(n-k),
// c[0] = 1 (Faddeev-LeVerrier).
std::vector<double> charpoly(const Matrix& a);
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);

// Orthogonal d x d matrix whose first rows are the given orthonormal rows; the
// rest is Gram-Schmidt over e_1..e_d in index order.
Matrix complete_orthonormal_rows(const std::vector<std::vector<double>>& rows, std::size_t d);

double hausdorff(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b);

}  // namespace hypclass
