#include "hypclass/factor.hpp"

#include <algorithm>
#include <cmath>

#include "hypclass/error.hpp"
#include "hypclass/normform.hpp"
#include "hypclass/tape.hpp"

namespace hypclass {

namespace {

Expr weight_inv2(int n, double gamma) {
  Expr s(gamma * gamma);
  for (int j = 1; j <= n; ++j) s = s + pow(Expr::xi(j), 2);
  return Expr(1.0) / s;
}

// Ratio between consecutive sups, with a floor so that exact zeros on both
// shells count as no growth.
double growth_ratio(double prev, double next, double floor) { return (next + floor) / (prev + floor); }

}  // namespace

std::vector<double> beta_from_blocks(const Matrix& block, const std::vector<double>& alpha1) {
  if (block.rows() == 0) return {};
  Lu lu(block.transposed());
  if (lu.singular(1e-12)) throw Error(ErrorKind::SingularBlock, "({phi_i, phi_j})_{3..r} is singular");
  return lu.solve(alpha1);
}

BetaReport beta_solve(const SymbolSystem& sys, const std::vector<PhasePoint>& samples) {
  BetaReport rep;
  PhasePoint base = sys.base_point().normalized();
  Matrix a = sys.bracket_matrix(base);
  rep.r = sys.declared_rank() ? *sys.declared_rank() : numeric_rank(a).rank;
  const int r = rep.r;
  const int d = sys.d();
  if (r <= 2) return rep;
  const std::size_t m = static_cast<std::size_t>(r - 2);
  Matrix block(m, m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < m; ++j) block(k, j) = a(k + 3, j + 3);

  const std::size_t N = sys.dim();
  const std::size_t nb = N + 1;
  Expr g = Expr::xi(0) - sys.phi(1);
  std::vector<Expr> outs(sys.phis());
  for (int j = 3; j <= r; ++j) outs.push_back(poisson(g, sys.phi(j)));
  Tape tape(outs, sys.n());
  const std::size_t ns = samples.size();
  if (ns < static_cast<std::size_t>(d) * nb)
    throw Error(ErrorKind::Precondition, "beta fit needs at least " + std::to_string(d * nb) + " samples");
  Matrix design(ns, static_cast<std::size_t>(d) * nb);
  Matrix ys(ns, m);
  for (std::size_t s = 0; s < ns; ++s) {
    std::vector<double> z = samples[s].flat();
    std::vector<double> v(outs.size());
    tape.eval(z.data(), v.data());
    for (int k = 0; k < d; ++k)
      for (std::size_t c = 0; c < nb; ++c) design(s, k * nb + c) = v[k] * (c == 0 ? 1.0 : z[c - 1]);
    for (std::size_t j = 0; j < m; ++j) ys(s, j) = v[d + j];
  }
  std::vector<double> zbar = base.flat();
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> y = ys.col(j);
    std::vector<double> c = least_squares(design, y);
    std::vector<double> fit = design * c;
    for (std::size_t s = 0; s < ns; ++s) rep.fit_residual = std::max(rep.fit_residual, std::abs(fit[s] - y[s]));
    double a1 = c[0];
    for (std::size_t q = 1; q < nb; ++q) a1 += c[q] * zbar[q - 1];
    rep.alpha1.push_back(a1);
  }
  rep.misfit = rep.fit_residual > 1e-6;
  rep.beta = beta_from_blocks(block, rep.alpha1);
  rep.orthogonality = std::abs(dot(rep.beta, rep.alpha1));
  return rep;
}

Prepared prepare_for_factorization(const SymbolSystem& sys, const std::optional<Expr>& theta_ext) {
  if (!theta_ext) return Prepared{sys, sys.theta_or_zero(), Expr(0.0), false};
  Expr theta = sys.theta_or_zero();
  Expr nu = (theta - *theta_ext) / 2.0;
  Kakikae kk = kakikae_rewrite(theta, nu);
  SymbolSpec spec = sys.spec();
  Expr phi1 = kk.scale * spec.phis[0];
  spec.phis[0] = phi1;
  spec.theta = *theta_ext;
  Expr extra = (kk.theta_hat - *theta_ext) * pow(phi1, 2);
  spec.remainder = spec.remainder ? *spec.remainder + extra : extra;
  spec.name = sys.name() + "+ext";
  return Prepared{SymbolSystem(std::move(spec)), *theta_ext, nu, true};
}

Factorization build_factorization(const SymbolSystem& sys, const std::vector<PhasePoint>& samples,
                                  const FactorOptions& opt, const std::optional<Expr>& theta_ext) {
  Prepared prep = prepare_for_factorization(sys, theta_ext);
  const SymbolSystem& s = prep.sys;
  const int n = s.n();
  const int d = s.d();
  Factorization f;
  f.n = n;
  f.gamma = opt.gamma;
  f.theta_tilde = prep.theta_tilde;
  f.beta = beta_solve(s, samples);
  f.ell = Expr(0.0);
  for (std::size_t j = 0; j < f.beta.beta.size(); ++j) f.ell = f.ell + f.beta.beta[j] * s.phi(static_cast<int>(j) + 3);
  f.weight = weight_inv2(n, opt.gamma);
  f.samples = samples.size();

  const Expr phi1 = s.phi(1);
  const Expr& ell = f.ell;
  const Expr& w = f.weight;
  Expr base_q = prep.theta_tilde * pow(phi1, 2) - Expr(2.0) * ell * pow(phi1, 2) * (Expr(1.0) + ell / 2.0);
  for (int j = 2; j <= d; ++j) base_q = base_q + pow(s.phi(j), 2);
  if (s.remainder()) base_q = base_q + *s.remainder();

  auto assemble = [&](double lam) {
    f.lam = lam;
    f.Lambda_hat = phi1 * (Expr(1.0) + ell) - lam * pow(phi1, 3) * w;
    f.Q = base_q + Expr(2.0 * lam) * pow(phi1, 4) * w * (Expr(1.0) + ell - lam * pow(phi1, 2) * w / 2.0);
    f.Lambda = Expr::xi(0) - f.Lambda_hat;
    f.M = Expr::xi(0) + f.Lambda_hat;
  };
  auto q_min = [&]() {
    Tape t(std::span<const Expr>(&f.Q, 1), n);
    double mn = HUGE_VAL;
    for (const auto& rho : samples) mn = std::min(mn, t.eval1(rho));
    return samples.empty() ? 0.0 : mn;
  };

  if (opt.lam > 0.0) {
    assemble(opt.lam);
    f.q_min = q_min();
  } else {
    double lam = 1.0;
    for (int i = 0;; ++i, lam *= 2.0) {
      assemble(lam);
      f.q_min = q_min();
      if (f.q_min >= -opt.q_tol) break;
      if (i >= opt.lam_cap_log2)
        throw Error(ErrorKind::Convergence, "Q stays negative (min " + num(f.q_min) + ") up to lam = 2^" +
                                                std::to_string(opt.lam_cap_log2));
    }
  }

  std::vector<Expr> outs{sys.symbol(), f.Lambda * f.M - f.Q};
  Tape t(outs, n);
  for (const auto& rho : samples) {
    auto v = t.eval(rho);
    f.identity_residual = std::max(f.identity_residual, std::abs(v[0] + v[1]) / (1.0 + std::abs(v[0])));
  }
  f.prepared = prep.sys;
  return f;
}

Factorization raw_factorization(int n, Expr Lambda, Expr M, Expr Q) {
  Factorization f;
  f.n = n;
  f.Lambda = std::move(Lambda);
  f.M = std::move(M);
  f.Q = std::move(Q);
  return f;
}

DefnOneReport check_defn_one(const Factorization& f, const SymbolSystem& shell_sys, const Region& region,
                             int per_shell) {
  if (per_shell <= 0) per_shell = kShellOversample * region.samples;
  std::vector<Expr> outs{f.Q, poisson(f.Lambda, f.Q), poisson(f.Lambda, f.M), f.Lambda - f.M};
  Tape t(outs, f.n);
  DefnOneReport rep;
  bool positive = true;
  for (std::size_t i = 0; i < region.shells.size(); ++i) {
    ShellStat st;
    st.eps = region.shells[i];
    st.q_min = HUGE_VAL;
    for (const auto& rho : shell_samples(shell_sys, region, st.eps, per_shell, 100 + i)) {
      std::vector<double> z = rho.flat();
      double v[4];
      t.eval(z.data(), v);
      st.q_min = std::min(st.q_min, v[0]);
      if (!(v[0] > 0.0)) {
        positive = false;
        st.c1 = st.c2 = HUGE_VAL;
        continue;
      }
      st.c1 = std::max(st.c1, std::abs(v[1]) / v[0]);
      st.c2 = std::max(st.c2, std::abs(v[2]) / (std::sqrt(v[0]) + std::abs(v[3])));
      ++st.samples;
    }
    rep.C1 = std::max(rep.C1, st.c1);
    rep.C2 = std::max(rep.C2, st.c2);
    rep.shells.push_back(st);
  }
  // Growth is read off the sup over everything at distance >= eps, so a shell
  // whose sampled sup happens to dip does not show up as growth in the next.
  const double floor = 1e-9 * std::max({1.0, rep.C1, rep.C2});
  std::vector<double> s1, s2;
  for (const auto& st : rep.shells) {
    s1.push_back(s1.empty() ? st.c1 : std::max(s1.back(), st.c1));
    s2.push_back(s2.empty() ? st.c2 : std::max(s2.back(), st.c2));
  }
  for (std::size_t i = 0; i + 1 < s1.size(); ++i) {
    rep.growth = std::max({rep.growth, growth_ratio(s1[i], s1[i + 1], floor), growth_ratio(s2[i], s2[i + 1], floor)});
    if (i + 2 < s1.size())
      rep.growth_two_decades =
          std::max({rep.growth_two_decades, growth_ratio(s1[i], s1[i + 2], floor), growth_ratio(s2[i], s2[i + 2], floor)});
  }
  rep.pass = positive && std::isfinite(rep.C1) && std::isfinite(rep.C2) && rep.growth <= 2.0;
  return rep;
}

SufficientReport sufficient_conditions(const SymbolSystem& sys, const Region& region, const FactorOptions& opt,
                                       int per_shell) {
  if (per_shell <= 0) per_shell = kShellOversample * region.samples;
  const int d = sys.d();
  if (d < 2) throw Error(ErrorKind::Precondition, "sufficient conditions need phi_1 and phi_2");
  Expr theta = sys.theta_or_zero();
  Expr g = Expr::xi(0) - sys.phi(1);
  std::vector<Expr> outs{theta};
  for (int j = 1; j <= d; ++j) outs.push_back(sys.phi(j));
  outs.push_back(poisson(g, theta));
  outs.push_back(poisson(poisson(g, sys.phi(2)), sys.phi(2)));
  Tape t(outs, sys.n());
  SufficientReport rep;
  rep.theta_nonnegative = true;
  std::vector<double> v(outs.size());
  // r1 climbs to its plateau over a couple of decades when theta is flat at the
  // base point, so the verdict looks past the region's innermost shell.
  std::vector<double> ladder = region.shells;
  if (!ladder.empty())
    for (int extra = 0; extra < 2; ++extra) ladder.push_back(ladder.back() / 10.0);
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    SufficientShell sh;
    sh.eps = ladder[i];
    sh.theta_min = HUGE_VAL;
    for (const auto& rho : shell_samples(sys, region, sh.eps, per_shell, 200 + i)) {
      std::vector<double> z = rho.flat();
      t.eval(z.data(), v.data());
      double th = v[0];
      sh.theta_min = std::min(sh.theta_min, th);
      double prime = 0.0;
      for (int j = 2; j <= d; ++j) prime += v[j] * v[j];
      double den = std::sqrt(std::max(th, 0.0)) + std::abs(v[1]) + std::sqrt(std::sqrt(prime));
      sh.r1 = std::max(sh.r1, std::abs(v[d + 1]) / (den * den));
      sh.r2 = std::max(sh.r2, std::abs(v[d + 2]) / den);
    }
    rep.theta_nonnegative = rep.theta_nonnegative && sh.theta_min >= -1e-12;
    rep.shells.push_back(sh);
  }
  double m1 = 0.0, m2 = 0.0;
  for (const auto& s : rep.shells) {
    m1 = std::max(m1, s.r1);
    m2 = std::max(m2, s.r2);
  }
  const std::size_t first = rep.shells.size() > 3 ? rep.shells.size() - 3 : 0;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < first; ++i) {
    s1 = std::max(s1, rep.shells[i].r1);
    s2 = std::max(s2, rep.shells[i].r2);
  }
  for (std::size_t i = first; i + 1 < rep.shells.size(); ++i) {
    s1 = std::max(s1, rep.shells[i].r1);
    s2 = std::max(s2, rep.shells[i].r2);
    rep.growth1 = std::max(rep.growth1, growth_ratio(s1, std::max(s1, rep.shells[i + 1].r1), 1e-9 * std::max(1.0, m1)));
    rep.growth2 = std::max(rep.growth2, growth_ratio(s2, std::max(s2, rep.shells[i + 1].r2), 1e-9 * std::max(1.0, m2)));
  }
  rep.cond1 = std::isfinite(m1) && rep.growth1 <= 2.0;
  rep.cond2 = std::isfinite(m2) && rep.growth2 <= 2.0;
  if (rep.cond1 && rep.cond2 && rep.theta_nonnegative) {
    std::vector<PhasePoint> samples = neighborhood_samples(sys, region, std::max(region.samples, 4 * (sys.d() + 1) * static_cast<int>(sys.dim() + 1)), 300);
    Factorization f = build_factorization(sys, samples, opt);
    rep.implied = check_defn_one(f, sys, region, per_shell);
    rep.implication_ok = rep.implied->pass;
  }
  return rep;
}

LowerBound q_lower_bound(const Factorization& f, const std::vector<PhasePoint>& samples) {
  if (!f.prepared) throw Error(ErrorKind::Precondition, "lower bound needs a factorization built from a system");
  const SymbolSystem& s = *f.prepared;
  const int d = s.d();
  Expr prime(0.0);
  for (int j = 2; j <= d; ++j) prime = prime + pow(s.phi(j), 2);
  Expr phi1 = s.phi(1);
  Expr den = prime + f.theta_tilde * pow(phi1, 2) + pow(phi1, 4) * f.weight;
  std::vector<Expr> outs{f.Q, den};
  Tape t(outs, f.n);
  LowerBound lb;
  lb.c = HUGE_VAL;
  for (const auto& rho : samples) {
    auto v = t.eval(rho);
    if (!(v[1] > 0.0)) continue;
    lb.c = std::min(lb.c, v[0] / v[1]);
    ++lb.samples;
  }
  if (lb.samples == 0) lb.c = 0.0;
  return lb;
}

}  // namespace hypclass
