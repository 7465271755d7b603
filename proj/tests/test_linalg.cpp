#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hypclass/error.hpp"
#include "hypclass/linalg.hpp"
#include "hypclass/rng.hpp"

using namespace hypclass;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

// Greedy matching distance between two spectra.
double spectrum_distance(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b) {
  double worst = 0.0;
  for (const auto& z : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const auto& u, const auto& v) { return std::abs(u - z) < std::abs(v - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST_CASE("matrix basics") {
  Matrix a{{1, 2}, {3, 4}};
  Matrix b = a * Matrix::identity(2);
  CHECK(b(1, 0) == 3);
  CHECK(a.transposed()(0, 1) == 3);
  CHECK((a - a).max_abs() == 0);
  CHECK(det(a) == doctest::Approx(-2.0));
  auto x = solve(a, {5, 6});
  CHECK(x[0] == doctest::Approx(-4.0));
  CHECK(x[1] == doctest::Approx(4.5));
}

TEST_CASE("svd reconstructs and matches singular values") {
  Rng rng(1, 0);
  for (int t = 0; t < 10; ++t) {
    Matrix a = random_matrix(7, 4, rng);
    Svd s = svd(a);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(to_eigen(a));
    for (int i = 0; i < 4; ++i) CHECK(s.sigma[i] == doctest::Approx(oracle.singularValues()(i)).epsilon(1e-12));
    Matrix sig(4, 4);
    for (int i = 0; i < 4; ++i) sig(i, i) = s.sigma[i];
    CHECK((s.u * sig * s.v.transposed() - a).max_abs() < 1e-12);
  }
}

TEST_CASE("numeric rank, null and range spaces") {
  Matrix a{{1, 2, 3}, {2, 4, 6}, {1, 0, 1}};
  CHECK(numeric_rank(a).rank == 2);
  Matrix ns = null_space(a);
  REQUIRE(ns.cols() == 1);
  CHECK((a * ns).max_abs() < 1e-12);
  Matrix rs = range_space(a);
  CHECK(rs.cols() == 2);
  CHECK((rs.transposed() * rs - Matrix::identity(2)).max_abs() < 1e-12);
  RankInfo amb = numeric_rank(std::vector<double>{1.0, 1e-9});
  CHECK(amb.ambiguous);
}

TEST_CASE("skew matrices have even rank") {
  Rng rng(2, 0);
  Matrix s(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      s(i, j) = rng.uniform(-1, 1);
      s(j, i) = -s(i, j);
    }
  CHECK(numeric_rank(s).rank == 4);
}

TEST_CASE("lu solve and singular detection") {
  Rng rng(3, 0);
  Matrix a = random_matrix(6, 6, rng);
  std::vector<double> b(6);
  for (double& v : b) v = rng.uniform(-1, 1);
  Lu lu(a);
  auto x = lu.solve(b);
  auto r = a * x;
  for (int i = 0; i < 6; ++i) CHECK(r[i] == doctest::Approx(b[i]));
  CHECK(lu.det() == doctest::Approx(to_eigen(a).determinant()).epsilon(1e-12));
  CHECK(Lu(Matrix{{1, 2}, {2, 4}}).singular());
}

TEST_CASE("least squares matches the Eigen oracle") {
  Rng rng(4, 0);
  Matrix a = random_matrix(10, 3, rng);
  std::vector<double> b(10);
  for (double& v : b) v = rng.uniform(-1, 1);
  auto x = least_squares(a, b);
  Eigen::VectorXd eb = Eigen::Map<Eigen::VectorXd>(b.data(), 10);
  Eigen::VectorXd ex = to_eigen(a).colPivHouseholderQr().solve(eb);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(ex(i)).epsilon(1e-10));
}

TEST_CASE("eigenvalues match the Eigen oracle") {
  Rng rng(5, 0);
  for (std::size_t n : {2u, 3u, 5u, 8u, 12u, 20u}) {
    Matrix a = random_matrix(n, n, rng);
    auto got = eigenvalues(a);
    Eigen::EigenSolver<Eigen::MatrixXd> oracle(to_eigen(a), false);
    std::vector<std::complex<double>> want(oracle.eigenvalues().data(), oracle.eigenvalues().data() + n);
    CHECK(spectrum_distance(got, want) < 1e-9);
  }
}

TEST_CASE("eigenvalues of a Hamiltonian matrix come in +- pairs") {
  // J S with S symmetric.
  Rng rng(6, 0);
  Matrix s(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) s(i, j) = s(j, i) = rng.uniform(-1, 1);
  Matrix j{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}};
  auto ev = eigenvalues(j * s);
  std::vector<std::complex<double>> neg;
  for (auto z : ev) neg.push_back(-z);
  CHECK(spectrum_distance(ev, neg) < 1e-10);
}

TEST_CASE("charpoly and poly_mul") {
  Matrix a{{2, 1}, {0, 3}};
  auto c = charpoly(a);
  CHECK(c == std::vector<double>{1, -5, 6});
  CHECK(poly_mul({1, -1}, {1, 2}) == std::vector<double>{1, 1, -2});
}

TEST_CASE("orthonormal completion") {
  double s = std::sqrt(0.5);
  Matrix q = complete_orthonormal_rows({{s, s, 0}}, 3);
  CHECK((q * q.transposed() - Matrix::identity(3)).max_abs() < 1e-14);
  CHECK(q(0, 0) == doctest::Approx(s));
}

TEST_CASE("hausdorff distance") {
  std::vector<std::complex<double>> a{{1, 0}, {0, 1}}, b{{1, 0}, {0, 1.5}};
  CHECK(hausdorff(a, b) == doctest::Approx(0.5));
}
