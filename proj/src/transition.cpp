#include <algorithm>
#include <cmath>

#include "hypclass/error.hpp"
#include "hypclass/flow.hpp"

namespace hypclass {

BRoots b_roots(double kappa, double nu, double delta) {
  if (delta == 0.0) throw Error(ErrorKind::Degenerate, "delta = {phi_1, phi_2}(rho bar) vanishes");
  if (kappa == 0.0 && nu == 0.0) throw Error(ErrorKind::Precondition, "kappa = nu = 0: no root b");
  BRoots out;
  if (nu == 0.0) {
    out.roots = {1.0 / (kappa * delta)};
  } else {
    double disc = kappa * kappa - 4.0 * nu;
    if (disc < 0.0)
      throw Error(ErrorKind::Precondition, "kappa^2 - 4 nu = " + num(disc) + " < 0: no real root b");
    // nu delta b^2 - kappa b + 1/delta = 0, cancellation-free form.
    double q = 0.5 * (kappa + std::copysign(std::sqrt(disc), kappa == 0.0 ? 1.0 : kappa));
    double r1 = q / (nu * delta);
    double r2 = 1.0 / (delta * q);
    out.roots = {std::min(r1, r2), std::max(r1, r2)};
    if (disc == 0.0) out.roots.resize(1);
  }
  out.b = out.roots.front();
  for (double r : out.roots) {
    double cur = delta * kappa * out.b, cand = delta * kappa * r;
    if (cand < cur || (cand == cur && r > out.b)) out.b = r;
  }
  return out;
}

LeadingConstants leading_constants(double b, double kappa, double nu, double delta) {
  LeadingConstants c;
  c.phi1 = b;
  c.x0 = 2.0 * b;
  c.phi2 = b / delta;
  c.theta = -nu * b * b;
  c.xi0 = 0.5 * (kappa * b * b / delta - nu * b * b * b);
  auto sup = [](std::initializer_list<double> v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
  };
  c.residual_independent = sup({-4.0 * c.xi0 + 2.0 * kappa * c.phi1 * c.phi2 + 2.0 * delta * c.theta * c.phi2,
                                -c.x0 + 2.0 * c.phi1, -2.0 * c.phi1 + 2.0 * delta * c.phi2,
                                -2.0 * c.theta - nu * c.x0 * c.phi1,
                                -3.0 * c.phi2 + 2.0 * kappa * c.phi1 * c.phi1 + 2.0 * delta * c.xi0 +
                                    2.0 * delta * c.theta * c.phi1});
  double th = -nu * c.x0 * c.x0 / 4.0;
  c.residual_dependent = sup({-4.0 * c.xi0 + 2.0 * kappa * c.phi1 * c.phi2 + 2.0 * delta * th * c.phi2,
                              -c.x0 + 2.0 * c.phi1, -2.0 * c.phi1 + 2.0 * delta * c.phi2,
                              -3.0 * c.phi2 + 2.0 * kappa * c.phi1 * c.phi1 + 2.0 * delta * c.xi0 +
                                  2.0 * delta * th * c.phi1});
  return c;
}

const char* to_string(FlowCase c) { return c == FlowCase::Independent ? "independent" : "dependent"; }

AIReport a_I_matrix(double kappa, double nu, double delta, double b, FlowCase fc) {
  double scale = std::max({1.0, std::abs(1.0 / delta), std::abs(kappa * b), std::abs(nu * delta * b * b)});
  double root = 1.0 / delta - kappa * b + nu * delta * b * b;
  if (std::abs(root) > 1e-12 * scale)
    throw Error(ErrorKind::Precondition, "b is not a root of 1/delta - kappa b + nu delta b^2 (residual " +
                                             num(root) + ")");
  AIReport rep;
  const double kdb = kappa * delta * b;
  std::vector<double> quad{1.0, 5.0, 8.0 - 4.0 * kdb};
  if (fc == FlowCase::Independent) {
    rep.A = Matrix{{-1, 0, 0, 2, 0},
                   {0, -3, 2 * delta, 2 * (kappa * b + 1 / delta), 2 * delta * b},
                   {0, 2 / delta, -4, 2 * kappa * b / delta, 2 * b},
                   {0, 2 * delta, 0, -2, 0},
                   {-nu * b, 0, 0, -2 * nu * b, -2}};
    rep.expected = poly_mul(poly_mul(poly_mul({1.0, -1.0}, {1.0, 2.0}), {1.0, 6.0}), quad);
  } else {
    rep.A = Matrix{{-1, 0, 0, 2},
                   {-2 * nu * delta * b * b, -3, 2 * delta, 2 * (kappa * b + 1 / delta)},
                   {-2 * nu * b * b, 2 / delta, -4, 2 * kappa * b / delta},
                   {0, 2 * delta, 0, -2}};
    rep.expected = poly_mul(poly_mul({1.0, -1.0}, {1.0, 6.0}), quad);
  }
  rep.charpoly = charpoly(rep.A);
  for (std::size_t i = 0; i < rep.expected.size(); ++i)
    rep.charpoly_residual = std::max(rep.charpoly_residual, std::abs(rep.charpoly[i] - rep.expected[i]) /
                                                                std::max(1.0, std::abs(rep.expected[i])));
  rep.eigenvalues = eigenvalues(rep.A);
  const double tol = 1e-8 * std::max(1.0, rep.A.max_abs());
  std::size_t one = rep.eigenvalues.size();
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
    if (std::abs(rep.eigenvalues[i] - 1.0) <= tol) one = i;
  rep.has_one = one < rep.eigenvalues.size();
  rep.others_negative = true;
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    const auto& z = rep.eigenvalues[i];
    if (i == one || std::abs(z.imag()) > tol) continue;
    rep.others_negative = rep.others_negative && z.real() < 0.0;
  }
  return rep;
}

TransitionAnalysis transition_invariants(const SymbolSystem& sys, const TransitionOptions& opt,
                                         const std::optional<Expr>& theta_in) {
  TransitionAnalysis ta;
  PhasePoint rho = sys.base_point().normalized();
  require_on_sigma(sys, rho);
  const int d = sys.d();
  if (d < 2) throw Error(ErrorKind::Precondition, "transition analysis needs at least phi_1 and phi_2");
  Expr theta = theta_in ? *theta_in : sys.theta_or_zero();
  Matrix a = sys.bracket_matrix(rho);
  ta.r = numeric_rank(a).rank;
  const double scale = std::max(1.0, a.max_abs());
  ta.delta = a(1, 2);
  if (std::abs(ta.delta) <= opt.tol * scale)
    throw Error(ErrorKind::Degenerate, "delta = {phi_1, phi_2}(rho bar) vanishes");

  Expr g = Expr::xi(0) - sys.phi(1);
  // kappa is read off after phi_1 -> sqrt(1 + theta) phi_1; this matters when
  // theta has a component along phi_1.
  Expr g_mu = Expr::xi(0) - sqrt(Expr(1.0) + theta) * sys.phi(1);
  ta.kappa = eval(poisson(poisson(g_mu, sys.phi(2)), sys.phi(2)), rho) / ta.delta;
  Expr g_theta = poisson(g, theta);
  ta.nu = eval(poisson(g, g_theta), rho);
  // Rounding-level values would otherwise turn the linear case into a quadratic
  // with a spurious huge root.
  if (std::abs(ta.nu) <= 1e-12 * scale) ta.nu = 0.0;
  if (std::abs(ta.kappa) <= 1e-12 * scale) ta.kappa = 0.0;
  ta.discriminant = ta.kappa * ta.kappa - 4.0 * ta.nu;

  // Normal form at the base point together with theta(rho bar) = 0 and the
  // vanishing of {xi0 - phi1, theta} and {phi_j, theta}, j > r.
  ta.theta_base = eval(theta, rho);
  double res = std::max(std::abs(ta.theta_base), std::abs(eval(g_theta, rho)));
  for (int j = 0; j <= d; ++j) res = std::max(res, std::abs(a(0, j) - a(1, j)));
  for (int j = ta.r + 1; j <= d; ++j) res = std::max(res, std::abs(eval(poisson(sys.phi(j), theta), rho)));
  ta.precondition_residual = res;
  if (res > opt.tol * scale)
    throw Error(ErrorKind::Precondition,
                "transition preconditions fail at the base point (residual " + num(res) + ")");

  // d theta against d phi_0..d phi_d.
  const int n = sys.n();
  const std::size_t N = sys.dim();
  std::vector<double> grad(N);
  for (std::size_t k = 0; k < N; ++k) {
    Var v = static_cast<int>(k) <= n ? Var::x(static_cast<int>(k)) : Var::xi(static_cast<int>(k) - n - 1);
    grad[k] = eval(diff(theta, v), rho);
  }
  double gnorm = norm2(grad);
  if (gnorm > 1e-12) {
    Matrix jt = sys.phi_jacobian(rho).transposed();
    std::vector<double> c = least_squares(jt, grad);
    std::vector<double> fit = jt * c;
    for (std::size_t k = 0; k < N; ++k) fit[k] -= grad[k];
    ta.dependence_residual = norm2(fit) / gnorm;
  }
  ta.flow_case = ta.dependence_residual > opt.dependence_tol ? FlowCase::Independent : FlowCase::Dependent;

  ta.exists_tangent = ta.discriminant > 0.0;
  if (ta.discriminant >= 0.0 && !(ta.kappa == 0.0 && ta.nu == 0.0)) {
    ta.roots = b_roots(ta.kappa, ta.nu, ta.delta);
    ta.leading = leading_constants(ta.roots->b, ta.kappa, ta.nu, ta.delta);
    ta.a_I = a_I_matrix(ta.kappa, ta.nu, ta.delta, ta.roots->b, ta.flow_case);
  }
  return ta;
}

}  // namespace hypclass
