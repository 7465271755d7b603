#include <doctest.h>

#include <cmath>

#include "hypclass/builtins.hpp"
#include "hypclass/error.hpp"
#include "hypclass/normform.hpp"
#include "hypclass/spectral.hpp"

using namespace hypclass;

namespace {

Region region() {
  Region r;
  r.seed = 11;
  return r;
}

}  // namespace

TEST_CASE("built-ins in normal form get a certificate") {
  for (const char* name : {"rei1", "rei3"}) {
    Problem pb = builtin(name);
    auto cert = verify_normal_form(pb.sys, neighborhood_samples(pb.sys, region(), 30, 1));
    CHECK(cert.verdict);
    CHECK(cert.c1 <= cert.tol);
    CHECK(cert.c2 <= cert.tol);
    CHECK(cert.c3 > cert.floor);
  }
}

TEST_CASE("raw rei2 frame is not in normal form") {
  Problem pb = builtin("rei2", {{"k", "1"}});
  auto cert = verify_normal_form(pb.sys, neighborhood_samples(pb.sys, region(), 30, 2));
  CHECK_FALSE(cert.verdict);
}

TEST_CASE("rewrite keeps (1 + theta) phi_1^2") {
  Expr theta = parse("x0 + x2^2");
  Expr nu = parse("x2/3");
  Kakikae kk = kakikae_rewrite(theta, nu);
  PhasePoint rho({0.2, 0.1, -0.4, 0.0}, {0.0, 0.3, 0.0, 1.0});
  double lhs = 1.0 + eval(theta, rho);
  double s = eval(kk.scale, rho);
  CHECK((1.0 + eval(kk.theta_hat, rho)) * s * s == doctest::Approx(lhs).epsilon(1e-14));
}

TEST_CASE("rewrite rejects a vanishing scale") {
  std::vector<PhasePoint> pts{PhasePoint({0.0, 0.0}, {0.0, 1.0}), PhasePoint({-1.0, 0.0}, {0.0, 1.0})};
  CHECK_THROWS_AS(kakikae_rewrite(Expr::x(0), Expr::x(0), pts), Error);
}

TEST_CASE("theta hat map is inverted") {
  for (double t : {-0.5, -0.1, 0.0, 0.3, 2.0}) CHECK(theta_from_hat(theta_hat_map(t)) == doctest::Approx(t));
  CHECK(theta_hat_map(0.0) == 0.0);
  CHECK_THROWS_AS(theta_hat_map(-1.0), Error);
}

TEST_CASE("pointwise reduction of the raw rei2 frame") {
  Problem pb = builtin("rei2", {{"k", "1"}});
  for (const auto& rho : pinned_samples(pb.sys, region(), Var::x(2), 0.02, 0.2, 10, 3)) {
    PointwiseFrame pf = pointwise_normal_form(pb.sys, rho);
    CHECK(pf.congruence_residual < 1e-10);
    CHECK(pf.xi0_residual < 1e-10);
    CHECK(pf.theta == doctest::Approx(theta_at(pb.sys, rho)).epsilon(1e-10));
    CHECK((pf.C * pf.A * pf.C.transposed() - pf.B).max_abs() < 1e-10);
    CHECK(std::abs(pf.delta) > 1e-6);
  }
}

TEST_CASE("extension check") {
  Problem pb = builtin("rei3", {{"k", "2"}, {"nu", "x2^2"}});
  auto samples = neighborhood_samples(pb.sys, region(), 40, 4);
  auto good = extension_check(pb.sys, *pb.theta_ext, samples);
  CHECK(good.pass);
  CHECK(good.agreement <= good.tol);
  auto bad = extension_check(pb.sys, Expr::x(0), samples);
  CHECK_FALSE(bad.pass);
}
