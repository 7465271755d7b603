#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>

#include "hypclass/error.hpp"
#include "hypclass/factor.hpp"
#include "hypclass/flow.hpp"
#include "hypclass/normform.hpp"
#include "hypclass/report.hpp"
#include "hypclass/spectral.hpp"

namespace hypclass {

namespace {

class Suite {
 public:
  void add(const std::string& name, double value, double tol, bool pass, Json extra = Json::object()) {
    Json c{{"name", name}, {"result", tv(value, tol)}, {"pass", pass}};
    for (auto it = extra.begin(); it != extra.end(); ++it) c[it.key()] = it.value();
    checks_.push_back(std::move(c));
    ok_ = ok_ && pass;
  }
  // A check whose module call threw is a failure with the message attached.
  void guard(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      add(name, NAN, 0.0, false, Json{{"error", e.what()}});
    }
  }
  Json take() { return std::move(checks_); }
  bool ok() const { return ok_; }

 private:
  Json checks_ = Json::array();
  bool ok_ = true;
};

Expr random_poly(Rng& rng, int n) {
  Expr out(0.0);
  const int nv = 2 * (n + 1);
  for (int t = 0; t < 3; ++t) {
    Expr term(std::round(rng.uniform(-4.0, 4.0) * 4.0) / 4.0);
    for (int f = 0; f < 3; ++f) {
      int v = static_cast<int>(rng.next() % nv);
      int e = 1 + static_cast<int>(rng.next() % 2);
      term = term * pow(v <= n ? Expr::x(v) : Expr::xi(v - n - 1), e);
    }
    out = out + term;
  }
  return out;
}

void bracket_algebra(Suite& s, std::uint64_t seed) {
  const int n = 2;
  Rng rng(seed, 11);
  double anti = 0.0, leib = 0.0, jac = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Expr f = random_poly(rng, n), g = random_poly(rng, n), h = random_poly(rng, n);
    PhasePoint rho(n);
    for (double& v : rho.x) v = rng.uniform(-1.0, 1.0);
    for (double& v : rho.xi) v = rng.uniform(-1.0, 1.0);
    double fg = eval(poisson(f, g), rho), gf = eval(poisson(g, f), rho);
    double a = std::abs(fg + gf) / (1.0 + std::abs(fg));
    double l1 = eval(poisson(f, g * h), rho);
    double t1 = fg * eval(h, rho), t2 = eval(g, rho) * eval(poisson(f, h), rho);
    double l = std::abs(l1 - t1 - t2) / (1.0 + std::abs(t1) + std::abs(t2));
    double j1 = eval(poisson(f, poisson(g, h)), rho), j2 = eval(poisson(g, poisson(h, f)), rho),
           j3 = eval(poisson(h, poisson(f, g)), rho);
    double j = std::abs(j1 + j2 + j3) / (1.0 + std::abs(j1) + std::abs(j2) + std::abs(j3));
    anti = std::max(anti, a);
    leib = std::max(leib, l);
    jac = std::max(jac, j);
    failures += (a > 1e-12) + (l > 1e-12) + (j > 1e-8);
  }
  s.add("expr.antisymmetry", anti, 1e-12, anti <= 1e-12);
  s.add("expr.leibniz", leib, 1e-12, leib <= 1e-12);
  s.add("expr.jacobi", jac, 1e-8, jac <= 1e-8);
  int canon = 0;
  PhasePoint rho(n);
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) {
      canon += eval(poisson(Expr::xi(i), Expr::x(k)), rho) != (i == k ? 1.0 : 0.0);
      canon += eval(poisson(Expr::x(i), Expr::x(k)), rho) != 0.0;
      canon += eval(poisson(Expr::xi(i), Expr::xi(k)), rho) != 0.0;
    }
  s.add("expr.canonical_relations", canon, 0.0, canon == 0);
  s.add("expr.bracket_suite_failures", failures, 0.0, failures == 0);
}

void kernels(Suite& s, std::uint64_t seed) {
  Problem pb = builtin("rei3", {{"k", "2"}, {"nu", "x2^2"}});
  const Tape& tape = pb.sys.field_tape();
  const std::size_t count = 37, nv = tape.num_vars(), no = tape.num_outputs();
  Rng rng(seed, 12);
  std::vector<double> z(nv * count), a(no * count), b(no * count);
  for (double& v : z) v = rng.uniform(-0.3, 0.3);
  tape.eval_batch(z.data(), count, a.data(), Kernel::Scalar);
  if (!avx2_available()) {
    s.add("tape.avx2_matches_scalar", 0, 0.0, true, Json{{"skipped", "no AVX2"}});
    return;
  }
  tape.eval_batch(z.data(), count, b.data(), Kernel::Avx2);
  long long diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::memcmp(&a[i], &b[i], sizeof(double)) != 0;
  s.add("tape.avx2_matches_scalar", diff, 0.0, diff == 0);
}

double rei2_closed_form(double x0, double x2, int k) {
  double kd = k, t = std::pow(x2, k);
  double num = 2.0 * t / kd + x0 * x0 * std::pow(x2, 2 * (k - 1)) - t * t / (kd * kd);
  double den = 1.0 - t / kd;
  return num / (den * den);
}

void spectral_checks(Suite& s, std::uint64_t seed) {
  Region reg;
  reg.seed = seed;
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    Problem pb = builtin("rei2", {{"k", std::to_string(k)}});
    for (const auto& rho : pinned_samples(pb.sys, reg, Var::x(2), 0.01, 0.2, 50, 20 + k)) {
      double cf = rei2_closed_form(rho.x[0], rho.x[2], k);
      worst = std::max(worst, std::abs(theta_at(pb.sys, rho) - cf) / std::abs(cf));
    }
  }
  s.add("spectral.theta_closed_form", worst, 1e-6, worst <= 1e-6);

  long long wrong = 0, dichotomy = 0, total = 0;
  double product = 0.0;
  int product_points = 0;
  for (int k : {2, 3}) {
    Problem pb = builtin("rei2", {{"k", std::to_string(k)}});
    auto pts = pinned_samples(pb.sys, reg, Var::x(2), 0.01, 0.2, 100, 30 + k);
    Region zero = reg;
    zero.sweep_lo = -0.1;
    zero.sweep_hi = 0.1;
    zero.sweep_steps = 3;
    pts.push_back(sweep_points(pb.sys, zero)[1]);
    for (const auto& rho : pts) {
      SpectralReport r = classify(pb.sys, rho);
      double x2 = rho.x[2];
      Label want = x2 == 0.0 ? Label::Type2 : (k == 3 && x2 < 0.0) ? Label::Effective : Label::Type1;
      wrong += r.label != want;
      dichotomy += (r.dimW > 0) != (std::abs(r.alpha_norm - 1.0) <= 1e-7);
      ++total;
      if (r.label != Label::Type2 && product_points < 40) {
        product = std::max(product, product_identity_check(pb.sys, rho));
        ++product_points;
      }
    }
  }
  s.add("spectral.classification_bands", wrong, 0.0, wrong == 0, Json{{"samples", total}});
  s.add("spectral.w_dichotomy", dichotomy, 0.0, dichotomy == 0, Json{{"samples", total}});
  s.add("spectral.product_identity", product, 1e-6, product <= 1e-6, Json{{"samples", product_points}});
}

void normal_form_checks(Suite& s, std::uint64_t seed) {
  Region reg;
  reg.seed = seed;
  for (const char* name : {"rei1", "rei3"}) {
    Problem pb = builtin(name);
    s.guard(std::string("normform.certificate.") + name, [&]() {
      auto cert = verify_normal_form(pb.sys, neighborhood_samples(pb.sys, reg, 40, 40));
      s.add(std::string("normform.certificate.") + name, std::max({cert.c1, cert.c2, cert.c4}), cert.tol,
            cert.verdict);
    });
  }
  Problem pb = builtin("rei3", {{"k", "2"}, {"nu", "x2^2"}});
  s.guard("normform.extension", [&]() {
    auto er = extension_check(pb.sys, *pb.theta_ext, neighborhood_samples(pb.sys, reg, 60, 41));
    s.add("normform.extension", er.agreement, er.tol, er.pass);
  });
  // x0 is not an extension of theta|Sigma: the check has to notice.
  s.guard("normform.extension_negative", [&]() {
    auto er = extension_check(pb.sys, Expr::x(0), neighborhood_samples(pb.sys, reg, 60, 41));
    s.add("normform.extension_negative", er.agreement, er.tol, !er.pass);
  });
}

void transition_checks(Suite& s, std::uint64_t seed) {
  Problem pb = builtin("rei3", {{"k", "1"}, {"nu", "0"}});
  s.guard("transition.rei3", [&]() {
    auto ta = transition_invariants(pb.sys);
    double err = std::max(std::abs(ta.kappa - 1.0), std::abs(ta.nu));
    s.add("transition.rei3", err, 1e-8, err <= 1e-8 && ta.exists_tangent);
  });
  Rng rng(seed, 50);
  double worst = 0.0;
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    double kappa = rng.uniform(-3.0, 3.0), delta = rng.sign() * rng.uniform(0.2, 3.0);
    double nu = rng.uniform(-2.0, 0.24 * kappa * kappa);
    if (kappa * kappa - 4.0 * nu <= 1e-6) continue;
    double b = b_roots(kappa, nu, delta).b;
    for (FlowCase fc : {FlowCase::Independent, FlowCase::Dependent}) {
      AIReport a = a_I_matrix(kappa, nu, delta, b, fc);
      worst = std::max(worst, a.charpoly_residual);
      bad += !(a.has_one && a.others_negative && a.charpoly_residual <= 1e-10);
    }
  }
  s.add("flow.A_I_spectra", worst, 1e-10, bad == 0, Json{{"failures", bad}});
  AIReport spot = a_I_matrix(1.0, 0.0, 1.0, 1.0, FlowCase::Dependent);
  std::vector<double> want{1.0, -1.0, -4.0, -6.0}, got;
  for (const auto& z : spot.eigenvalues) got.push_back(z.real());
  std::sort(got.begin(), got.end(), std::greater<>());
  double err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(got.at(i) - want[i]));
  s.add("flow.A_I_spot", err, 1e-10, err <= 1e-10);
}

void flow_checks(Suite& s, std::uint64_t seed, bool& tangent_confirmed) {
  Problem pb = builtin("rei3", {{"k", "1"}, {"nu", "0"}});
  s.guard("flow.tangent_orders", [&]() {
    auto ta = transition_invariants(pb.sys);
    auto tr = tangent_search(pb.sys, ta, pb.tangency);
    double o1 = tr.orders.at(1).fit.order, o2 = tr.orders.at(2).fit.order, o0 = tr.orders.at(0).fit.order;
    double err = std::max(std::abs(o1 - 2.0), std::abs(o2 - 3.0));
    bool pass = err <= 0.15 && o0 >= 2.0 - 0.15 && tr.p_drift <= 1e-9;
    tangent_confirmed = pass;
    s.add("flow.tangent_orders", err, 0.15, pass,
          Json{{"phi1", o1}, {"phi2", o2}, {"xi0", o0}, {"p_drift", tr.p_drift}});
  });

  std::vector<Problem> problems{builtin("rei1"), builtin("rei2", {{"k", "2"}}), builtin("rei3", {{"k", "1"}})};
  double drift = 0.0, trip = 0.0;
  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    const SymbolSystem& sys = problems[pi].sys;
    Rng rng(seed, 60 + pi);
    int made = 0;
    while (made < 20) {
      PhasePoint rho = box_point(sys.base_point().normalized(), 0.1, rng).normalized();
      rho.xi[0] = 0.0;
      double q = sys.p(rho);
      if (q < 0.0) continue;
      rho.xi[0] = rng.sign() * std::sqrt(q);
      ++made;
      Trajectory fw = integrate(sys, rho, 0.0, 0.5);
      Trajectory bw = integrate(sys, fw.point(fw.size() - 1), 0.5, 0.0);
      drift = std::max({drift, fw.max_drift, bw.max_drift});
      std::vector<double> z0 = rho.flat();
      for (std::size_t i = 0; i < z0.size(); ++i) trip = std::max(trip, std::abs(bw.z.back()[i] - z0[i]));
    }
  }
  s.add("flow.p_conservation", drift, 1e-9, drift <= 1e-9);
  s.add("flow.round_trip", trip, 1e-7, trip <= 1e-7);
}

void factor_checks(Suite& s, std::uint64_t seed, bool tangent_confirmed) {
  Region reg;
  reg.seed = seed;
  double worst = 0.0;
  std::vector<Problem> problems{builtin("rei1"), builtin("rei2", {{"k", "2"}}), builtin("rei3", {{"k", "1"}}),
                                builtin("rei3", {{"k", "2"}, {"nu", "x2^2"}})};
  s.guard("factor.identity", [&]() {
    for (const auto& pb : problems) {
      const int count = 4 * pb.sys.d() * static_cast<int>(pb.sys.dim() + 1);
      auto f = build_factorization(pb.sys, neighborhood_samples(pb.sys, reg, count, 70), {}, pb.theta_ext);
      worst = std::max(worst, f.identity_residual);
    }
    s.add("factor.identity", worst, 1e-9, worst <= 1e-9);
  });

  auto defn = [&](const Problem& pb) {
    const int count = 4 * pb.sys.d() * static_cast<int>(pb.sys.dim() + 1);
    auto samples = neighborhood_samples(pb.sys, reg, count, 71);
    auto f = build_factorization(pb.sys, samples, {}, pb.theta_ext);
    return std::make_pair(f, check_defn_one(f, *f.prepared, reg));
  };
  s.guard("factor.rei3_k2_passes", [&]() {
    Problem pb = builtin("rei3", {{"k", "2"}, {"nu", "x2^2"}});
    auto [f, d] = defn(pb);
    auto sc = sufficient_conditions(*f.prepared, reg);
    s.add("factor.rei3_k2_passes", d.growth, 2.0, d.pass && sc.cond1 && sc.cond2 && sc.implication_ok);
    auto lb1 = q_lower_bound(f, neighborhood_samples(pb.sys, reg, 100, 72));
    auto lb2 = q_lower_bound(f, neighborhood_samples(pb.sys, reg, 200, 73));
    double spread = std::abs(lb2.c - lb1.c) / lb1.c;
    s.add("factor.q_lower_bound", spread, 0.2, lb1.c > 0.0 && lb2.c > 0.0 && spread <= 0.2,
          Json{{"c", lb1.c}, {"c_dense", lb2.c}});
  });
  s.guard("factor.rei3_k1_fails", [&]() {
    auto [f, d] = defn(builtin("rei3", {{"k", "1"}, {"nu", "0"}}));
    s.add("factor.rei3_k1_fails", d.growth_two_decades, 4.0, !d.pass && d.growth_two_decades >= 4.0);
    // A confirmed tangent bicharacteristic rules out a factorization.
    s.add("factor.tangent_consistency", tangent_confirmed && d.pass, 0.0, !(tangent_confirmed && d.pass));
  });

  s.guard("factor.beta_r4", [&]() {
    const double a = 0.5;
    SymbolSpec spec;
    spec.name = "r4";
    spec.n = 3;
    spec.phis = {Expr::xi(1), (Expr::x(0) + Expr::x(1)) * Expr::xi(3), Expr::xi(2) + a * Expr::x(0) * Expr::xi(1),
                 Expr::x(2) * Expr::xi(3)};
    PhasePoint base(3);
    base.xi[3] = 1.0;
    spec.base_point = base;
    SymbolSystem sys(spec);
    auto rep = beta_solve(sys, neighborhood_samples(sys, reg, 4 * 4 * 9, 74));
    double err = rep.beta.size() == 2 ? std::max(std::abs(rep.beta[0]), std::abs(rep.beta[1] + a)) : HUGE_VAL;
    s.add("factor.beta_r4", err, 1e-8, err <= 1e-8 && rep.orthogonality <= 1e-10,
          Json{{"orthogonality", rep.orthogonality}});
  });
}

}  // namespace

Report run_selftest(std::uint64_t seed) {
  Suite s;
  bracket_algebra(s, seed);
  kernels(s, seed);
  spectral_checks(s, seed);
  normal_form_checks(s, seed);
  transition_checks(s, seed);
  bool tangent = false;
  flow_checks(s, seed, tangent);
  factor_checks(s, seed, tangent);
  Report rep;
  rep.command = "selftest";
  rep.ok = s.ok();
  rep.doc = Json{{"tool", "hypclass"},
                 {"version", kToolVersion},
                 {"command", "selftest"},
                 {"seed", seed},
                 {"rng", "splitmix64-counter"},
                 {"checks", s.take()},
                 {"status", rep.ok ? "ok" : "failed"}};
  return rep;
}

}  // namespace hypclass
