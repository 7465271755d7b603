#include "hypclass/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "hypclass/error.hpp"
#include "hypclass/normform.hpp"

namespace hypclass {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

std::string describe_point(const std::vector<double>& z) {
  std::string s = "(";
  for (std::size_t i = 0; i < z.size(); ++i) s += (i ? ", " : "") + num(z[i]);
  return s + ")";
}

}  // namespace

Trajectory integrate(const SymbolSystem& sys, const PhasePoint& rho0, double s0, double s1,
                     const IntegrateOptions& opt) {
  const std::size_t N = sys.dim();
  const Tape& field = sys.field_tape();
  Trajectory tr;
  tr.n = sys.n();
  std::vector<double> y = rho0.flat();
  tr.p0 = sys.p(rho0);
  tr.s.push_back(s0);
  tr.z.push_back(y);
  tr.p.push_back(tr.p0);
  if (s1 == s0) return tr;
  const double dir = s1 > s0 ? 1.0 : -1.0;

  std::vector<double> k1(N), k2(N), k3(N), k4(N), k5(N), k6(N), k7(N), tmp(N), y5(N);
  field.eval(y.data(), k1.data());
  double h = opt.h0;
  if (h <= 0.0) {
    double f = 0.0;
    for (double v : k1) f = std::max(f, std::abs(v));
    h = std::min(std::abs(s1 - s0), 1e-2 / std::max(f, 1e-6));
    if (opt.max_step_rel > 0.0 && s0 != 0.0) h = std::min(h, opt.max_step_rel * std::abs(s0));
  }
  double s = s0;
  std::size_t steps = 0;
  while (dir * (s1 - s) > 0.0) {
    if (++steps > opt.max_steps)
      throw Error(ErrorKind::Convergence, "integration exceeded the step budget at " + describe_point(y));
    double hmax = std::abs(s1 - s);
    if (opt.max_step_rel > 0.0 && s != 0.0) hmax = std::min(hmax, opt.max_step_rel * std::abs(s));
    h = std::min(h, hmax);
    if (h < opt.min_step * std::max(1.0, std::abs(s)))
      throw Error(ErrorKind::Convergence, "step size underflow at s = " + num(s) + ", last point " +
                                              describe_point(y));
    const double hs = dir * h;
    auto stage = [&](std::vector<double>& out, std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        tmp[i] = y[i] + hs * acc;
      }
      field.eval(tmp.data(), out.data());
    };
    stage(k2, {{a21, &k1}});
    stage(k3, {{a31, &k1}, {a32, &k2}});
    stage(k4, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    stage(k5, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    stage(k6, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    for (std::size_t i = 0; i < N; ++i)
      y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    field.eval(y5.data(), k7.data());
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(N));
    if (!std::isfinite(err))
      throw Error(ErrorKind::Convergence, "non-finite field near s = " + num(s) + ", last point " +
                                              describe_point(y));
    double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      s = (std::abs(s1 - s) <= h) ? s1 : s + hs;
      y = y5;
      k1 = k7;
      double pv = sys.p(PhasePoint::from_flat(y.data(), tr.n));
      tr.s.push_back(s);
      tr.z.push_back(y);
      tr.p.push_back(pv);
      tr.max_drift = std::max(tr.max_drift, std::abs(pv - tr.p0));
      if (std::abs(y[0]) > opt.stop_x0) break;
      h *= fac;
    } else {
      h *= std::min(fac, 1.0);
    }
  }
  return tr;
}

void reparametrize_x0(Trajectory& traj) {
  if (traj.size() < 3) throw Error(ErrorKind::Precondition, "trajectory too short to reparametrize by x0");
  double sgn = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    double dx = traj.z[i][0] - traj.z[i - 1][0];
    double ds = traj.s[i] - traj.s[i - 1];
    double v = dx / ds;
    if (v == 0.0 || (sgn != 0.0 && (v > 0.0) != (sgn > 0.0)))
      throw Error(ErrorKind::Precondition, "dx0/ds vanishes along the trajectory near s = " + num(traj.s[i]));
    sgn = v;
  }
  traj.x0_parametrized = true;
}

OrderFit vanishing_order(const Trajectory& traj, const Expr& f, double lo, double hi, double m) {
  if (!(lo > 0.0) || hi < 10.0 * lo * (1.0 - 1e-12))
    throw Error(ErrorKind::Precondition, "order window [" + num(lo) + ", " + num(hi) + "] spans less than a decade");
  Tape tape(std::span<const Expr>(&f, 1), traj.n);
  std::vector<double> lx, lf;
  double xmin = HUGE_VAL, xmax = 0.0, fmin_x = 0.0, f_at_min = 0.0;
  int sign = 0;
  bool any_nonzero = false;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double x0 = traj.z[i][0];
    double ax = std::abs(x0);
    if (ax < lo || ax > hi) continue;
    double v = 0.0;
    tape.eval(traj.z[i].data(), &v);
    if (v == 0.0) {
      ++zeros;
      continue;
    }
    any_nonzero = true;
    int sg = v > 0.0 ? 1 : -1;
    if (sign != 0 && sg != sign)
      throw Error(ErrorKind::Precondition, "function changes sign inside the order window");
    sign = sg;
    lx.push_back(std::log(ax));
    lf.push_back(std::log(std::abs(v)));
    if (ax < xmin) {
      xmin = ax;
      fmin_x = x0;
      f_at_min = v;
    }
    xmax = std::max(xmax, ax);
  }
  OrderFit fit;
  if (!any_nonzero) {
    if (zeros == 0) throw Error(ErrorKind::Precondition, "no trajectory samples inside the order window");
    fit.identically_zero = true;
    fit.order = std::numeric_limits<double>::infinity();
    fit.points = zeros;
    return fit;
  }
  if (zeros > 0) throw Error(ErrorKind::Precondition, "function vanishes at isolated samples in the window");
  if (lx.size() < 5 || xmax < 10.0 * xmin * (1.0 - 1e-3))
    throw Error(ErrorKind::Precondition, "trajectory samples cover less than a decade of |x0|");
  const std::size_t k = lx.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += lf[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (lf[i] - my);
  }
  fit.order = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double r = lf[i] - (my + fit.order * (lx[i] - mx));
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / k);
  fit.points = k;
  double denom = std::floor(m) == m ? std::pow(fmin_x, m) : std::pow(std::abs(fmin_x), m);
  fit.limit = f_at_min / denom;
  return fit;
}

namespace {

struct SeedRun {
  TangentResult res;
  double quality = HUGE_VAL;
};

SeedRun run_seed(const SymbolSystem& sys, const TransitionAnalysis& ta, const std::vector<Expr>& tangency,
                 const TangentOptions& opt, double t0) {
  const double b = ta.roots->b;
  const int d = sys.d();
  const int n = sys.n();
  const Expr theta = sys.theta_or_zero();

  // Leading-order seed: x0 = 2 b t, phi_1 = b t^2 (rescaled back by mu), phi_2 = b t^3 / delta.
  std::vector<Expr> funcs{Expr::x(0)};
  std::vector<double> targets{2.0 * b * t0};
  double theta_target = 0.0;
  if (ta.flow_case == FlowCase::Independent) theta_target = theta_from_hat(-ta.nu * b * b * t0 * t0);
  double mu = std::sqrt(1.0 + theta_target);
  for (int j = 1; j <= d; ++j) {
    funcs.push_back(sys.phi(j));
    targets.push_back(j == 1 ? b * t0 * t0 / mu : j == 2 ? b * t0 * t0 * t0 / ta.delta : 0.0);
  }
  if (ta.flow_case == FlowCase::Independent) {
    funcs.push_back(theta);
    targets.push_back(theta_target);
  }
  ConstraintSolver solver(funcs, n, {Var::xi(0), Var::xi(n)});
  PhasePoint rho = solver.solve(sys.base_point().normalized(), targets, 1e-14);
  rho.xi[0] = 0.0;
  double q = sys.p(rho);
  if (q < 0.0) throw Error(ErrorKind::Convergence, "seed point has no real characteristic xi_0");
  rho.xi[0] = std::copysign(std::sqrt(q), b);

  SeedRun run;
  TangentResult& res = run.res;
  res.t0 = t0;
  res.b = b;
  const double s0 = 1.0 / t0;
  IntegrateOptions io = opt.integ;
  if (io.max_step_rel <= 0.0) io.max_step_rel = 0.05;
  io.stop_x0 = 1.2 * opt.fit_hi;
  res.away = integrate(sys, rho, s0, s0 * 1e-4, io);
  IntegrateOptions toward = io;
  toward.stop_x0 = std::numeric_limits<double>::infinity();
  res.toward = integrate(sys, rho, s0, 2.0 * s0, toward);
  res.toward_x0_ratio = std::abs(res.toward.z.back()[0]) / std::abs(rho.x[0]);
  res.p_drift = std::max(res.away.max_drift, res.toward.max_drift);
  reparametrize_x0(res.away);

  res.window_lo = opt.window_factor * std::abs(2.0 * b) * t0;
  res.window_hi = opt.fit_hi;
  res.orders.push_back({"xi0", vanishing_order(res.away, Expr::xi(0), res.window_lo, res.window_hi, 2)});
  for (int j = 1; j <= d; ++j)
    res.orders.push_back({"phi" + std::to_string(j),
                          vanishing_order(res.away, sys.phi(j), res.window_lo, res.window_hi, j + 1)});
  res.orders.push_back({"theta", vanishing_order(res.away, theta, res.window_lo, res.window_hi, 2)});
  for (std::size_t i = 0; i < tangency.size(); ++i)
    res.orders.push_back({"k" + std::to_string(i + 1),
                          vanishing_order(res.away, tangency[i], res.window_lo, res.window_hi, 2)});
  run.quality = 0.5 * (res.orders[1].fit.rms + res.orders[2].fit.rms);
  return run;
}

}  // namespace

TangentResult tangent_search(const SymbolSystem& sys, const TransitionAnalysis& ta, const std::vector<Expr>& tangency,
                             const TangentOptions& opt) {
  if (!ta.exists_tangent || !ta.roots)
    throw Error(ErrorKind::Precondition,
                "tangent search needs kappa^2 - 4 nu > 0 (have " + num(ta.discriminant) + ")");
  std::vector<SeedResult> log;
  std::optional<SeedRun> best;
  std::size_t best_idx = 0;
  auto attempt = [&](double t0) -> bool {
    SeedResult sr;
    sr.t0 = t0;
    try {
      SeedRun run = run_seed(sys, ta, tangency, opt, t0);
      sr.ok = true;
      sr.quality = run.quality;
      if (!best || run.quality < best->quality) best = std::move(run);
    } catch (const Error& e) {
      sr.failure = e.what();
    }
    log.push_back(sr);
    return sr.ok;
  };
  for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
    double prev = best ? best->quality : HUGE_VAL;
    attempt(opt.seeds[i]);
    if (best && best->quality < prev) best_idx = i;
  }
  if (!best) {
    std::string why = log.empty() ? "no seeds" : "";
    for (const auto& sr : log) why += (why.empty() ? "" : "; ") + ("t0=" + num(sr.t0) + ": " + sr.failure);
    throw Error(ErrorKind::Convergence, "no seed produced a trajectory approaching rho bar: " + why);
  }
  // One bisection step on the log scale toward each neighbouring seed.
  if (best_idx > 0) attempt(std::sqrt(opt.seeds[best_idx] * opt.seeds[best_idx - 1]));
  if (best_idx + 1 < opt.seeds.size()) attempt(std::sqrt(opt.seeds[best_idx] * opt.seeds[best_idx + 1]));
  TangentResult out = std::move(best->res);
  out.seeds = std::move(log);
  return out;
}

void write_csv(std::ostream& os, const SymbolSystem& sys, const Trajectory& traj) {
  const int n = sys.n();
  const int d = sys.d();
  os << "s,t";
  for (int i = 0; i <= n; ++i) os << ",x" << i;
  for (int i = 0; i <= n; ++i) os << ",xi" << i;
  os << ",p";
  for (int j = 1; j <= d; ++j) os << ",phi" << j;
  os << ",theta\n";
  std::vector<Expr> outs(sys.phis());
  outs.push_back(sys.theta_or_zero());
  Tape tape(outs, n);
  std::vector<double> v(outs.size());
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double s = traj.s[i];
    os << s << ',' << (s != 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity());
    for (double c : traj.z[i]) os << ',' << c;
    os << ',' << traj.p[i];
    tape.eval(traj.z[i].data(), v.data());
    for (double c : v) os << ',' << c;
    os << '\n';
  }
}

}  // namespace hypclass
