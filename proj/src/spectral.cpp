#include "hypclass/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "hypclass/error.hpp"

namespace hypclass {

Matrix fundamental_matrix(const SymbolSystem& sys, const PhasePoint& rho_in, double sigma_tol) {
  PhasePoint rho = rho_in.normalized();
  require_on_sigma(sys, rho, sigma_tol);
  Matrix h = sys.hessian(rho);
  const std::size_t N = h.rows(), half = N / 2;
  Matrix f(N, N);
  for (std::size_t i = 0; i < half; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      f(i, j) = 0.5 * h(half + i, j);
      f(half + i, j) = -0.5 * h(i, j);
    }
  return f;
}

Spectrum spectrum(const Matrix& f) { return eigenvalues(f); }

WDim w_dim(const Matrix& f, double angle_tol) {
  Matrix f2 = f * f;
  WDim out;
  if (f2.max_abs() == 0.0) return out;
  Svd s = svd(f2);
  RankInfo info = numeric_rank(s.sigma);
  out.ambiguous = info.ambiguous;
  const std::size_t N = f.rows();
  const std::size_t rank = static_cast<std::size_t>(info.rank);
  const std::size_t nk = N - rank;
  if (nk == 0 || rank == 0) return out;
  Matrix stacked(N, nk + rank);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < nk; ++k) stacked(i, k) = s.v(i, rank + k);
    for (std::size_t k = 0; k < rank; ++k) stacked(i, nk + k) = s.u(i, k);
  }
  // The columns are orthonormal, so the smallest singular values are the
  // principal angles between Ker F^2 and Im F^2. Near theta = 0 the smallest
  // one is ||alpha| - 1| / sqrt 2, hence the absolute cutoff.
  std::vector<double> js = svd(stacked).sigma;
  int joint = 0;
  for (double v : js) {
    joint += v > angle_tol;
    out.ambiguous = out.ambiguous || (v > 0.1 * angle_tol && v < 10.0 * angle_tol);
  }
  out.dim = static_cast<int>(nk + rank) - joint;
  return out;
}

Matrix sos_bracket_matrix(const SymbolSystem& sys, const PhasePoint& rho) {
  Matrix a = sys.bracket_matrix(rho);
  double th = sys.theta_value(rho);
  if (!(1.0 + th > 0.0)) throw Error(ErrorKind::Domain, "1 + theta must be positive");
  double mu = std::sqrt(1.0 + th);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    a(1, j) *= mu;
    a(j, 1) *= mu;
  }
  return a;
}

KernelSplit kernel_split(const Matrix& a) {
  const std::size_t d = a.rows() - 1;
  KernelSplit ks;
  Svd s = svd(a);
  RankInfo info = numeric_rank(s.sigma);
  ks.r = info.rank;
  ks.rank_ambiguous = info.ambiguous;
  ks.P_prime = Matrix::identity(d);
  const std::size_t k = d + 1 - static_cast<std::size_t>(ks.r);
  if (k == 0) return ks;
  ks.has_kernel = true;
  Matrix kern(d + 1, k);
  for (std::size_t i = 0; i <= d; ++i)
    for (std::size_t c = 0; c < k; ++c) kern(i, c) = s.v(i, static_cast<std::size_t>(ks.r) + c);
  std::vector<double> n0 = kern.row(0);
  ks.first_entry_norm = norm2(n0);
  if (ks.first_entry_norm < 1e-10) return ks;

  // Kernel directions inside phi': combinations of kernel vectors orthogonal to n0.
  std::vector<double> u0(n0);
  for (double& v : u0) v /= ks.first_entry_norm;
  Matrix coef = complete_orthonormal_rows({u0}, k);
  std::vector<std::vector<double>> kernel_rows;
  for (std::size_t c = 1; c < k; ++c) {
    std::vector<double> dir(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t m = 0; m < k; ++m) dir[i] += kern(i + 1, m) * coef(c, m);
    double nd = norm2(dir);
    for (double& v : dir) v /= nd;
    kernel_rows.push_back(dir);
  }
  if (kernel_rows.empty()) return ks;
  Matrix full = complete_orthonormal_rows(kernel_rows, d);
  const std::size_t nkr = kernel_rows.size();
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t src = i < d - nkr ? nkr + i : i - (d - nkr);
    for (std::size_t j = 0; j < d; ++j) ks.P_prime(i, j) = full(src, j);
  }
  return ks;
}

double theta_from_alpha(double alpha_norm) {
  if (std::abs(alpha_norm - 1.0) <= kAlphaUnitTol) return 0.0;
  double a2 = alpha_norm * alpha_norm;
  return (1.0 - a2) / a2;
}

BracketTable bracket_table(const SymbolSystem& sys, const PhasePoint& rho_in, double sigma_tol) {
  PhasePoint rho = rho_in.normalized();
  require_on_sigma(sys, rho, sigma_tol);
  BracketTable t;
  const std::size_t d = static_cast<std::size_t>(sys.d());
  t.A_raw = sys.bracket_matrix(rho);
  t.A = sos_bracket_matrix(sys, rho);
  t.delta = d >= 2 ? t.A_raw(1, 2) : 0.0;

  KernelSplit ks = kernel_split(t.A);
  t.r = ks.r;
  t.rank_ambiguous = ks.rank_ambiguous;
  if (t.r % 2 != 0) throw Error(ErrorKind::Inconsistency, "bracket matrix has odd numeric rank");
  if (sys.declared_rank() && *sys.declared_rank() != t.r)
    throw Error(ErrorKind::RankMismatch, "declared rank " + std::to_string(*sys.declared_rank()) +
                                             " but computed rank " + std::to_string(t.r));
  if (t.r == 0) throw Error(ErrorKind::Degenerate, "degenerate configuration: all brackets vanish (A = 0)");
  if (!ks.has_kernel)
    throw Error(ErrorKind::Degenerate,
                "degenerate configuration: bracket matrix is nonsingular, no kernel vector with nonzero first entry");
  if (ks.first_entry_norm < 1e-10)
    throw Error(ErrorKind::Degenerate, "degenerate configuration: no kernel vector with nonzero first entry");
  double n0norm = ks.first_entry_norm;
  t.alpha_norm_kernel = std::sqrt(std::max(0.0, 1.0 / (n0norm * n0norm) - 1.0));
  const Matrix& pp = ks.P_prime;
  t.P = Matrix::identity(d + 1);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) t.P(i + 1, j + 1) = pp(i, j);
  t.A_rot = t.P * t.A * t.P.transposed();

  const std::size_t r = static_cast<std::size_t>(t.r);
  t.a.resize(r);
  t.M = Matrix(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    t.a[i] = t.A_rot(0, i + 1);
    for (std::size_t j = 0; j < r; ++j) t.M(i, j) = t.A_rot(j + 1, i + 1);
  }
  Lu lu(t.M);
  if (lu.singular(1e-10)) throw Error(ErrorKind::Degenerate, "degenerate configuration: M is singular");
  t.alpha = lu.solve(t.a);
  std::vector<double> res = t.M * t.alpha;
  for (std::size_t i = 0; i < r; ++i) res[i] -= t.a[i];
  t.m_residual = norm2(res) / std::max(1.0, norm2(t.a));
  t.alpha_norm = norm2(t.alpha);
  if (t.alpha_norm == 0.0) throw Error(ErrorKind::Degenerate, "degenerate configuration: alpha = 0");
  t.theta = theta_from_alpha(t.alpha_norm);
  return t;
}

double theta_at(const SymbolSystem& sys, const PhasePoint& rho) { return bracket_table(sys, rho).theta; }

const char* to_string(Label l) {
  switch (l) {
    case Label::Effective: return "effective";
    case Label::Type1: return "type1";
    case Label::Type2: return "type2";
  }
  return "?";
}

double trace_plus(const Spectrum& s, double scale) {
  double sum = 0.0;
  for (const auto& z : s)
    if (z.imag() > 1e-9 * scale) sum += z.imag();
  return sum;
}

SpectralReport classify(const SymbolSystem& sys, const PhasePoint& rho_in, const ClassifyOptions& opt) {
  PhasePoint rho = rho_in.normalized();
  SpectralReport rep;
  Matrix f = fundamental_matrix(sys, rho);
  rep.eigenvalues = spectrum(f);
  WDim w = w_dim(f);
  rep.dimW = w.dim;
  rep.dimW_ambiguous = w.ambiguous;
  BracketTable t = bracket_table(sys, rho);
  rep.theta = t.theta;
  rep.alpha_norm = t.alpha_norm;
  rep.rank = t.r;
  double scale = std::max(1.0, f.max_abs());
  rep.trace_plus = trace_plus(rep.eigenvalues, scale);
  if (rep.theta > opt.theta_band) {
    rep.label = Label::Type1;
  } else if (rep.theta < -opt.theta_band) {
    rep.label = Label::Effective;
  } else {
    rep.label = Label::Type2;
  }
  double max_re = 0.0;
  for (const auto& z : rep.eigenvalues) max_re = std::max(max_re, std::abs(z.real()));
  rep.has_real_pair = max_re > opt.real_part_tol * scale;
  if (std::abs(rep.theta) >= opt.crosscheck_band) {
    rep.spectrum_checked = true;
    bool spectral_effective = rep.has_real_pair;
    if (spectral_effective != (rep.label == Label::Effective))
      throw Error(ErrorKind::Inconsistency,
                  std::string("theta-sign label ") + to_string(rep.label) +
                      " disagrees with the spectrum (max |Re lambda| = " + num(max_re) + ")");
  }
  return rep;
}

Spectrum nonzero_part(const Spectrum& s, double rel) {
  double m = 1.0;
  for (const auto& z : s) m = std::max(m, std::abs(z));
  Spectrum out;
  for (const auto& z : s)
    if (std::abs(z) > rel * m) out.push_back(z);
  return out;
}

Spectrum largest(const Spectrum& s, std::size_t k) {
  Spectrum out = s;
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  out.resize(std::min(k, out.size()));
  return out;
}

double product_identity_check(const SymbolSystem& sys, const PhasePoint& rho_in) {
  PhasePoint rho = rho_in.normalized();
  Matrix f = fundamental_matrix(sys, rho);
  if (w_dim(f).dim != 0) throw Error(ErrorKind::Precondition, "product identity needs W(rho) = {0}");
  BracketTable t = bracket_table(sys, rho);
  double lhs = (1.0 - t.alpha_norm * t.alpha_norm) * det(t.M);
  std::complex<double> prod(1.0, 0.0);
  for (const auto& z : largest(spectrum(f), static_cast<std::size_t>(t.r))) prod *= z;
  double rhs = prod.real();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

double reduced_bracket_check(const SymbolSystem& sys, const PhasePoint& rho_in) {
  PhasePoint rho = rho_in.normalized();
  Matrix f = fundamental_matrix(sys, rho);
  Matrix a = sos_bracket_matrix(sys, rho);
  const std::size_t m = a.rows();
  Matrix ae(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) ae(i, j) = (i == 0 ? -1.0 : 1.0) * a(j, i);
  return hausdorff(nonzero_part(spectrum(f)), nonzero_part(eigenvalues(ae)));
}

}  // namespace hypclass
