#include "hypclass/normform.hpp"

#include <algorithm>
#include <cmath>

#include "hypclass/error.hpp"
#include "hypclass/spectral.hpp"

namespace hypclass {

namespace {

double local_scale(const SymbolSystem& sys, const PhasePoint& rho) {
  return std::max(1.0, sys.phi_jacobian(rho).max_abs());
}

}  // namespace

NormalFormCertificate verify_normal_form(const SymbolSystem& sys, const std::vector<PhasePoint>& samples,
                                         const NormalFormOptions& opt) {
  NormalFormCertificate cert;
  cert.tol = opt.tol;
  cert.floor = opt.floor;
  const int d = sys.d();
  PhasePoint base = sys.base_point().normalized();
  Matrix a0 = sys.bracket_matrix(base);
  cert.r = sys.declared_rank() ? *sys.declared_rank() : numeric_rank(a0).rank;
  const int r = cert.r;
  cert.c3 = d >= 2 ? std::abs(a0(1, 2)) : 0.0;
  if (r >= 3) {
    Matrix tail(r - 2, r - 2);
    for (int i = 3; i <= r; ++i)
      for (int j = 3; j <= r; ++j) tail(i - 3, j - 3) = a0(i, j);
    cert.c5 = std::abs(det(tail));
  }

  ProjectOptions popt;
  popt.include_xi0 = false;
  bool within = true;
  for (const auto& s : samples) {
    PhasePoint rho = project_to_sigma(sys, s, popt);
    Matrix a = sys.bracket_matrix(rho);
    double scale = local_scale(sys, rho);
    double c1 = 0.0, c2 = 0.0, c4 = 0.0;
    for (int i = 0; i <= d; ++i)
      for (int j = r + 1; j <= d; ++j) c1 = std::max(c1, std::abs(a(i, j)));
    for (int j = 0; j <= d; ++j) c2 = std::max(c2, std::abs(a(0, j) - a(1, j)));
    for (int j = 3; j <= std::min(r, d); ++j) c4 = std::max(c4, std::abs(a(2, j)));
    cert.c1 = std::max(cert.c1, c1);
    cert.c2 = std::max(cert.c2, c2);
    cert.c4 = std::max(cert.c4, c4);
    within = within && c1 <= opt.tol * scale && c2 <= opt.tol * scale && c4 <= opt.tol * scale;
    ++cert.samples;
  }
  cert.verdict = within && cert.c3 > opt.floor && cert.c5 > opt.floor;
  return cert;
}

Kakikae kakikae_rewrite(const Expr& theta, const Expr& nu) {
  Expr one_plus = Expr(1.0) + nu;
  if (one_plus.is_constant(0.0)) throw Error(ErrorKind::Domain, "1 + nu vanishes identically");
  return {one_plus, (theta - pow(nu, 2) - Expr(2.0) * nu) / pow(one_plus, 2)};
}

Kakikae kakikae_rewrite(const Expr& theta, const Expr& nu, const std::vector<PhasePoint>& region) {
  Kakikae k = kakikae_rewrite(theta, nu);
  for (const auto& rho : region)
    if (std::abs(eval(k.scale, rho)) < 1e-12) throw Error(ErrorKind::Domain, "1 + nu vanishes in the region");
  return k;
}

double theta_hat_map(double theta) {
  if (!(1.0 + theta > 0.0)) throw Error(ErrorKind::Domain, "theta_hat needs 1 + theta > 0");
  return -theta / (std::sqrt(1.0 + theta) + 1.0 + theta);
}

double theta_from_hat(double theta_hat) {
  if (!(1.0 + theta_hat > 0.0)) throw Error(ErrorKind::Domain, "inverse map needs 1 + theta_hat > 0");
  return 1.0 / ((1.0 + theta_hat) * (1.0 + theta_hat)) - 1.0;
}

PointwiseFrame pointwise_normal_form(const Matrix& a) {
  const std::size_t d = a.rows() - 1;
  PointwiseFrame fr;
  fr.A = a;
  KernelSplit ks = kernel_split(a);
  fr.r = ks.r;
  if (!ks.has_kernel || ks.first_entry_norm < 1e-10)
    throw Error(ErrorKind::NotTransitionPoint,
                "not a transition point: every kernel vector of the bracket matrix has zero first entry");
  const std::size_t r = static_cast<std::size_t>(ks.r);
  if (r < 2) throw Error(ErrorKind::Degenerate, "degenerate configuration: bracket rank below 2");
  fr.P = Matrix::identity(d + 1);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) fr.P(i + 1, j + 1) = ks.P_prime(i, j);
  Matrix a_rot = fr.P * a * fr.P.transposed();

  // A_1 alpha = a', psi = -sum alpha_j phi_j.
  Matrix a1(r, r);
  std::vector<double> ap(r);
  for (std::size_t i = 0; i < r; ++i) {
    ap[i] = a_rot(0, i + 1);
    for (std::size_t j = 0; j < r; ++j) a1(i, j) = a_rot(i + 1, j + 1);
  }
  Lu lu(a1);
  if (lu.singular(1e-10)) throw Error(ErrorKind::SingularBlock, "singular A_1 block");
  fr.alpha = lu.solve(ap);
  fr.alpha_norm = norm2(fr.alpha);
  if (fr.alpha_norm == 0.0) throw Error(ErrorKind::Degenerate, "degenerate configuration: alpha = 0");
  fr.theta = theta_from_alpha(fr.alpha_norm);

  std::vector<double> first(r);
  for (std::size_t i = 0; i < r; ++i) first[i] = -fr.alpha[i] / fr.alpha_norm;
  Matrix t = complete_orthonormal_rows({first}, r);
  fr.T = Matrix::identity(d + 1);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) fr.T(i + 1, j + 1) = t(i, j);

  // Kernel of the skew form on rows 2..r becomes the new phi_2.
  Matrix stage = fr.T * a_rot * fr.T.transposed();
  fr.Q = Matrix::identity(d + 1);
  if (r >= 3) {
    Matrix a2 = stage.block(2, 2, r - 1, r - 1);
    Matrix ker = null_space(a2);
    if (ker.cols() == 0) throw Error(ErrorKind::Degenerate, "phi_2..phi_r block has no kernel");
    std::vector<double> beta = ker.col(0);
    Matrix q = complete_orthonormal_rows({beta}, r - 1);
    for (std::size_t i = 0; i + 1 < r; ++i)
      for (std::size_t j = 0; j + 1 < r; ++j) fr.Q(i + 2, j + 2) = q(i, j);
  }

  // Row 1 is psi itself (not normalized) so the symbol reads (1+theta) psi^2.
  fr.C = fr.Q * fr.T * fr.P;
  for (std::size_t j = 0; j <= d; ++j) fr.C(1, j) *= fr.alpha_norm;
  fr.B = fr.C * a * fr.C.transposed();

  // C'^T D C' = I on the phi' block, D = diag(1+theta, 1, ..., 1).
  double one_plus = 1.0 / (fr.alpha_norm * fr.alpha_norm);
  Matrix cp = fr.C.block(1, 1, d, d);
  Matrix dm = Matrix::identity(d);
  dm(0, 0) = one_plus;
  fr.congruence_residual = (cp.transposed() * dm * cp - Matrix::identity(d)).max_abs();

  for (std::size_t j = 0; j <= d; ++j)
    fr.xi0_residual = std::max(fr.xi0_residual, std::abs(fr.B(0, j) - fr.B(1, j)));
  for (std::size_t j = 3; j <= r; ++j) fr.phi2_residual = std::max(fr.phi2_residual, std::abs(fr.B(2, j)));
  fr.delta = fr.B(1, 2);
  if (r >= 4) fr.det_tail = det(fr.B.block(3, 3, r - 2, r - 2));

  const double tol = 1e-8 * std::max(1.0, a.max_abs());
  if (fr.xi0_residual > tol || fr.phi2_residual > tol)
    throw Error(ErrorKind::Inconsistency, "pointwise normal form conditions not met (residual " +
                                              num(std::max(fr.xi0_residual, fr.phi2_residual)) + ")");
  if (std::abs(fr.delta) <= tol) throw Error(ErrorKind::Degenerate, "{phi_1, phi_2} vanishes after reduction");
  if (r >= 4 && std::abs(fr.det_tail) <= tol) throw Error(ErrorKind::Degenerate, "phi_3..phi_r block is singular");
  return fr;
}

PointwiseFrame pointwise_normal_form(const SymbolSystem& sys, const PhasePoint& rho) {
  PhasePoint p = rho.normalized();
  require_on_sigma(sys, p);
  return pointwise_normal_form(sos_bracket_matrix(sys, p));
}

ExtensionReport extension_check(const SymbolSystem& sys, const Expr& theta_tilde,
                                const std::vector<PhasePoint>& samples, double tol) {
  ExtensionReport rep;
  rep.tol = tol;
  const int d = sys.d();
  const int n = sys.n();
  const std::size_t N = sys.dim();
  Expr b1 = poisson(sys.phi(1), theta_tilde);
  Expr b2 = d >= 2 ? poisson(sys.phi(2), theta_tilde) : Expr(0.0);
  std::vector<Expr> outs{b1, b2, theta_tilde, sys.theta_or_zero()};
  for (int j = 1; j <= d; ++j) outs.push_back(sys.phi(j));
  Tape tape(outs, n);

  // Coefficients c are smooth functions; fit them as affine in (x, xi).
  const std::size_t nb = N + 1;
  const std::size_t ns = samples.size();
  Matrix m1(ns, 2 * nb), m2(ns, nb);
  std::vector<double> y1(ns), y2(ns);
  double scale = 1.0;
  for (std::size_t s = 0; s < ns; ++s) {
    PhasePoint rho = samples[s].normalized();
    auto v = tape.eval(rho);
    std::vector<double> z = rho.flat();
    double phi1 = v[4], phi2 = d >= 2 ? v[5] : 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      double basis = k == 0 ? 1.0 : z[k - 1];
      m1(s, k) = phi1 * basis;
      m1(s, nb + k) = phi2 * basis;
      m2(s, k) = phi2 * basis;
    }
    y1[s] = v[0];
    y2[s] = v[1];
    scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
  }
  auto sup_residual = [&](const Matrix& m, const std::vector<double>& y) {
    if (ns == 0) return 0.0;
    std::vector<double> c = least_squares(m, y);
    std::vector<double> fit = m * c;
    double worst = 0.0;
    for (std::size_t s = 0; s < ns; ++s) worst = std::max(worst, std::abs(fit[s] - y[s]));
    return worst;
  };
  rep.fit1_residual = sup_residual(m1, y1);
  rep.fit2_residual = d >= 2 ? sup_residual(m2, y2) : 0.0;

  // Sigma'-side checks.
  PhasePoint base = sys.base_point().normalized();
  int r = sys.declared_rank() ? *sys.declared_rank() : numeric_rank(sys.bracket_matrix(base)).rank;
  std::vector<Expr> sig_outs{theta_tilde, sys.theta_or_zero()};
  for (int j = 3; j <= std::min(r, d); ++j) sig_outs.push_back(poisson(sys.phi(j), theta_tilde));
  Tape sig(sig_outs, n);
  ProjectOptions popt;
  popt.include_xi0 = false;
  rep.theta_inf = rep.ext_inf = HUGE_VAL;
  rep.theta_sup = rep.ext_sup = -HUGE_VAL;
  for (const auto& s0 : samples) {
    PhasePoint rho = project_to_sigma(sys, s0, popt);
    auto v = sig.eval(rho);
    rep.agreement = std::max(rep.agreement, std::abs(v[0] - v[1]));
    rep.theta_inf = std::min(rep.theta_inf, v[1]);
    rep.theta_sup = std::max(rep.theta_sup, v[1]);
    for (std::size_t j = 2; j < v.size(); ++j) rep.sigma_residual = std::max(rep.sigma_residual, std::abs(v[j]));
  }
  for (const auto& s0 : samples) {
    double e = eval(theta_tilde, s0.normalized());
    rep.ext_inf = std::min(rep.ext_inf, e);
    rep.ext_sup = std::max(rep.ext_sup, e);
  }
  double slack = tol * scale;
  rep.range_ok = samples.empty() || (rep.ext_inf >= rep.theta_inf - slack && rep.ext_sup <= rep.theta_sup + slack);
  rep.pass = rep.fit1_residual <= slack && rep.fit2_residual <= slack && rep.sigma_residual <= slack &&
             rep.agreement <= slack && rep.range_ok;
  return rep;
}

}  // namespace hypclass
