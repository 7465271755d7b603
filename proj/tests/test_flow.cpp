#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hypclass/builtins.hpp"
#include "hypclass/error.hpp"
#include "hypclass/flow.hpp"

using namespace hypclass;

namespace {

// p = -xi0^2 + xi1^2: straight lines, exact solution known.
SymbolSystem wave() {
  SymbolSpec spec;
  spec.name = "wave";
  spec.n = 1;
  spec.phis = {Expr::xi(1)};
  spec.base_point = PhasePoint({0.0, 0.0}, {0.0, 1.0});
  return SymbolSystem(spec);
}

}  // namespace

TEST_CASE("free wave flow is a straight line") {
  SymbolSystem sys = wave();
  PhasePoint rho({0.5, -1.0}, {1.0, 1.0});
  Trajectory tr = integrate(sys, rho, 0.0, 2.0);
  PhasePoint end = tr.point(tr.size() - 1);
  CHECK(tr.s.back() == doctest::Approx(2.0));
  CHECK(end.x[0] == doctest::Approx(0.5 - 2 * 1.0 * 2.0));
  CHECK(end.x[1] == doctest::Approx(-1.0 + 2 * 1.0 * 2.0));
  CHECK(end.xi[1] == 1.0);
  CHECK(tr.max_drift < 1e-14);
}

TEST_CASE("integration runs backwards and conserves p") {
  Problem pb = builtin("rei3", {{"k", "2"}});
  PhasePoint rho = pb.sys.base_point().normalized();
  rho.x[1] = 0.05;
  rho.x[0] = 0.02;
  rho.xi[0] = 0.0;
  rho.xi[0] = std::sqrt(pb.sys.p(rho));
  Trajectory fw = integrate(pb.sys, rho, 0.0, 0.4);
  Trajectory bw = integrate(pb.sys, fw.point(fw.size() - 1), 0.4, 0.0);
  CHECK(fw.max_drift < 1e-9);
  auto z0 = rho.flat();
  for (std::size_t i = 0; i < z0.size(); ++i) CHECK(bw.z.back()[i] == doctest::Approx(z0[i]).epsilon(1e-8));
}

TEST_CASE("stop on |x0|") {
  SymbolSystem sys = wave();
  IntegrateOptions opt;
  opt.stop_x0 = 1.0;
  Trajectory tr = integrate(sys, PhasePoint({0.0, 0.0}, {1.0, 1.0}), 0.0, 10.0, opt);
  CHECK(tr.s.back() < 10.0);
  CHECK(std::abs(tr.z.back()[0]) >= 1.0);
}

TEST_CASE("vanishing order of a power along x0") {
  SymbolSystem sys = wave();
  // x0 = -2 s, x1 = 2 s, so x1^3 has order 3 in x0.
  IntegrateOptions opt;
  opt.max_step_rel = 0.05;
  Trajectory tr = integrate(sys, PhasePoint({0.0, 0.0}, {1.0, 1.0}), 1e-4, 1.0, opt);
  reparametrize_x0(tr);
  OrderFit f = vanishing_order(tr, pow(Expr::x(1), 3), 1e-3, 1e-1);
  CHECK(f.order == doctest::Approx(3.0).epsilon(1e-6));
  OrderFit z = vanishing_order(tr, Expr::xi(0) - Expr::xi(1), 1e-3, 1e-1);
  CHECK(z.identically_zero);
  CHECK(std::isinf(z.order));
  CHECK_THROWS_AS(vanishing_order(tr, Expr::x(1), 1e-2, 5e-2), Error);
}

TEST_CASE("x0 that turns back is rejected") {
  SymbolSystem sys = wave();
  // xi0 = 0: x0 does not move.
  Trajectory tr = integrate(sys, PhasePoint({0.0, 0.0}, {0.0, 1.0}), 0.0, 1.0);
  CHECK_THROWS_AS(reparametrize_x0(tr), Error);
}

TEST_CASE("b roots") {
  auto r = b_roots(2.0, 0.0, 0.5);
  REQUIRE(r.roots.size() == 1);
  CHECK(r.b == doctest::Approx(1.0));
  auto q = b_roots(3.0, 2.0, 1.0);
  REQUIRE(q.roots.size() == 2);
  for (double b : q.roots) CHECK(1.0 - 3.0 * b + 2.0 * b * b == doctest::Approx(0.0));
  CHECK(q.b == doctest::Approx(0.5));  // smaller delta kappa b
  CHECK_THROWS_AS(b_roots(1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(b_roots(1.0, 0.0, 0.0), Error);
}

TEST_CASE("leading constants solve their equations") {
  double kappa = 1.3, nu = 0.2, delta = 0.8;
  double b = b_roots(kappa, nu, delta).b;
  LeadingConstants lc = leading_constants(b, kappa, nu, delta);
  CHECK(lc.residual_independent < 1e-12);
  CHECK(lc.residual_dependent < 1e-12);
}

TEST_CASE("A_I spot spectrum") {
  AIReport a = a_I_matrix(1.0, 0.0, 1.0, 1.0, FlowCase::Dependent);
  CHECK(a.has_one);
  CHECK(a.others_negative);
  CHECK(a.charpoly_residual < 1e-12);
  std::vector<double> re;
  for (auto z : a.eigenvalues) re.push_back(z.real());
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-6.0));
  CHECK(re[1] == doctest::Approx(-4.0));
  CHECK(re[2] == doctest::Approx(-1.0));
  CHECK(re[3] == doctest::Approx(1.0));
  CHECK_THROWS_AS(a_I_matrix(1.0, 0.0, 1.0, 2.0, FlowCase::Dependent), Error);
}

TEST_CASE("transition invariants of rei3") {
  Problem pb = builtin("rei3", {{"k", "1"}});
  TransitionAnalysis ta = transition_invariants(pb.sys);
  CHECK(ta.kappa == doctest::Approx(1.0));
  CHECK(ta.nu == doctest::Approx(0.0));
  CHECK(ta.exists_tangent);
  REQUIRE(ta.roots);
  CHECK(ta.roots->b * ta.kappa * ta.delta == doctest::Approx(1.0));
  CHECK(ta.precondition_residual < 1e-8);
}

TEST_CASE("transition rejects a base point off the transition set") {
  Problem pb = builtin("rei1", {{"theta", "0.5"}});
  CHECK_THROWS_AS(transition_invariants(pb.sys), Error);
}

TEST_CASE("tangent search on rei3 k=1") {
  Problem pb = builtin("rei3", {{"k", "1"}});
  TransitionAnalysis ta = transition_invariants(pb.sys);
  TangentResult tr = tangent_search(pb.sys, ta, pb.tangency);
  CHECK(tr.b == doctest::Approx(1.0));
  CHECK(tr.orders.at(1).fit.order == doctest::Approx(2.0).epsilon(0.05));
  CHECK(tr.orders.at(2).fit.order == doctest::Approx(3.0).epsilon(0.05));
  CHECK(tr.p_drift < 1e-9);
  CHECK(tr.window_hi / tr.window_lo >= 10.0);

  std::ostringstream os;
  write_csv(os, pb.sys, tr.away);
  std::string head = os.str().substr(0, os.str().find('\n'));
  CHECK(head == "s,t,x0,x1,x2,x3,xi0,xi1,xi2,xi3,p,phi1,phi2,theta");
}
