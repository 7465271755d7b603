#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hypclass/builtins.hpp"
#include "hypclass/error.hpp"
#include "hypclass/spectral.hpp"

using namespace hypclass;

namespace {

Spectrum eigen_spectrum(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> es(e, false);
  return Spectrum(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
}

Region region(std::uint64_t seed = 5) {
  Region r;
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("fundamental matrix spectrum agrees with Eigen") {
  Problem pb = builtin("rei2", {{"k", "1"}});
  for (const auto& rho : sigma_samples(pb.sys, region(), 10, 1)) {
    Matrix f = fundamental_matrix(pb.sys, rho);
    CHECK(hausdorff(nonzero_part(spectrum(f)), nonzero_part(eigen_spectrum(f))) < 1e-7);
  }
}

TEST_CASE("rei1 recovers the declared theta") {
  Problem pb = builtin("rei1", {{"theta", "x2"}});
  for (const auto& rho : sigma_samples(pb.sys, region(), 20, 2)) {
    double want = rho.x[2];
    if (std::abs(want) < 1e-6) continue;
    CHECK(theta_at(pb.sys, rho) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("rei1 with zero theta is type 2 with nontrivial W") {
  Problem pb = builtin("rei1", {{"theta", "0"}});
  for (const auto& rho : sigma_samples(pb.sys, region(), 10, 3)) {
    SpectralReport r = classify(pb.sys, rho);
    CHECK(r.label == Label::Type2);
    CHECK(r.dimW > 0);
    CHECK_THROWS_AS(product_identity_check(pb.sys, rho), Error);
  }
}

TEST_CASE("rei1 type 1 point has spectrum +-i sqrt(tau)") {
  Problem pb = builtin("rei1", {{"theta", "0.25"}});
  PhasePoint rho = project_to_sigma(pb.sys, pb.sys.base_point());
  SpectralReport r = classify(pb.sys, rho);
  CHECK(r.label == Label::Type1);
  CHECK(r.theta == doctest::Approx(0.25));
  auto nz = nonzero_part(r.eigenvalues);
  REQUIRE(nz.size() == 2);
  for (auto z : nz) {
    CHECK(std::abs(z.real()) < 1e-10);
    CHECK(std::abs(z.imag()) == doctest::Approx(0.5));
  }
  CHECK(r.trace_plus == doctest::Approx(0.5));
  CHECK(product_identity_check(pb.sys, rho) < 1e-10);
}

TEST_CASE("rei2 closed-form theta in both frames") {
  for (int k : {1, 2, 3}) {
    Problem raw = builtin("rei2", {{"k", std::to_string(k)}});
    Problem normal = builtin("rei2", {{"k", std::to_string(k)}, {"frame", "normal"}});
    for (const auto& rho : pinned_samples(raw.sys, region(), Var::x(2), 0.02, 0.2, 10, 4)) {
      double kd = k, t = std::pow(rho.x[2], k);
      double cf = (2 * t / kd + rho.x[0] * rho.x[0] * std::pow(rho.x[2], 2 * (k - 1)) - t * t / (kd * kd)) /
                  std::pow(1 - t / kd, 2);
      CHECK(theta_at(raw.sys, rho) == doctest::Approx(cf).epsilon(1e-8));
      PhasePoint on = project_to_sigma(normal.sys, rho);
      CHECK(normal.sys.theta_value(on) == doctest::Approx(theta_at(raw.sys, on)).epsilon(1e-7));
    }
  }
}

TEST_CASE("classification bands for rei2 k=3") {
  Problem pb = builtin("rei2", {{"k", "3"}});
  for (const auto& rho : pinned_samples(pb.sys, region(), Var::x(2), 0.02, 0.2, 30, 5)) {
    SpectralReport r = classify(pb.sys, rho);
    CHECK(r.label == (rho.x[2] < 0 ? Label::Effective : Label::Type1));
    CHECK(r.has_real_pair == (r.label == Label::Effective));
    CHECK(r.dimW == 0);
  }
  Region z = region();
  z.sweep_lo = -0.1;
  z.sweep_hi = 0.1;
  z.sweep_steps = 3;
  auto pts = sweep_points(pb.sys, z);
  CHECK(classify(pb.sys, pts[1]).label == Label::Type2);
}

TEST_CASE("product identity at effective and type 1 points") {
  Problem pb = builtin("rei2", {{"k", "1"}});
  int effective = 0;
  for (const auto& rho : pinned_samples(pb.sys, region(), Var::x(2), 0.02, 0.2, 20, 6)) {
    SpectralReport r = classify(pb.sys, rho);
    effective += r.label == Label::Effective;
    CHECK(product_identity_check(pb.sys, rho) < 1e-8);
  }
  CHECK(effective > 0);
}

TEST_CASE("orthogonal rotation of the frame leaves the spectrum alone") {
  Problem pb = builtin("rei2", {{"k", "2"}});
  SymbolSpec rot = pb.sys.spec();
  const double c = std::cos(0.7), s = std::sin(0.7);
  // phi_2 and phi_3 enter p as a plain sum of squares, so rotating them keeps p.
  rot.phis = {pb.sys.phis()[0], c * pb.sys.phis()[1] + s * pb.sys.phis()[2],
              -s * pb.sys.phis()[1] + c * pb.sys.phis()[2]};
  SymbolSystem rs(rot);
  for (const auto& rho : pinned_samples(pb.sys, region(), Var::x(2), 0.02, 0.2, 10, 7)) {
    auto a = nonzero_part(spectrum(fundamental_matrix(pb.sys, rho)));
    auto b = nonzero_part(spectrum(fundamental_matrix(rs, rho)));
    CHECK(hausdorff(a, b) < 1e-7);
    CHECK(classify(rs, rho).label == classify(pb.sys, rho).label);
  }
}

TEST_CASE("bracket rank is constant on Sigma") {
  for (const char* name : {"rei1", "rei2", "rei3"}) {
    Problem pb = builtin(name);
    std::optional<int> r;
    for (const auto& rho : sigma_samples(pb.sys, region(), 15, 9)) {
      int here = bracket_table(pb.sys, rho).r;
      if (!r) r = here;
      CHECK(here == *r);
    }
  }
}

TEST_CASE("reduced bracket spectrum matches F") {
  Problem pb = builtin("rei2", {{"k", "1"}});
  for (const auto& rho : pinned_samples(pb.sys, region(), Var::x(2), 0.02, 0.2, 10, 10))
    CHECK(reduced_bracket_check(pb.sys, rho) < 1e-7);
}

TEST_CASE("off-Sigma points are rejected") {
  Problem pb = builtin("rei1");
  PhasePoint rho = pb.sys.base_point();
  rho.xi[1] = 0.3;
  CHECK_THROWS_AS(classify(pb.sys, rho), Error);
}

TEST_CASE("theta from alpha and trace plus") {
  CHECK(theta_from_alpha(1.0 + 1e-10) == 0.0);
  CHECK(theta_from_alpha(0.5) == doctest::Approx(3.0));
  Spectrum s{{0, 2}, {0, -2}, {0, 3}, {0, -3}, {1, 0}};
  CHECK(trace_plus(s) == doctest::Approx(5.0));
  CHECK(largest(s, 2).size() == 2);
}
