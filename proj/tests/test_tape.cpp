#include <doctest.h>

#include <cmath>
#include <cstring>

#include "hypclass/expr.hpp"
#include "hypclass/rng.hpp"
#include "hypclass/tape.hpp"

using namespace hypclass;

TEST_CASE("tape agrees with tree evaluation") {
  std::vector<Expr> outs{parse("x0*xi1 + sqrt(1 + x1^2)"), parse("(x0 - xi0)^3/(2 + x1^2)"), Expr(4.0)};
  Tape tape(outs, 1);
  CHECK(tape.num_outputs() == 3);
  Rng rng(3, 0);
  for (int i = 0; i < 20; ++i) {
    PhasePoint rho(1);
    for (double& v : rho.x) v = rng.uniform(-1, 1);
    for (double& v : rho.xi) v = rng.uniform(-1, 1);
    auto got = tape.eval(rho);
    for (std::size_t o = 0; o < outs.size(); ++o) CHECK(got[o] == doctest::Approx(eval(outs[o], rho)).epsilon(1e-14));
  }
}

TEST_CASE("shared subexpressions take one slot") {
  Expr a = parse("x0*xi1 + x1");
  Tape one(std::vector<Expr>{a}, 1);
  Tape two(std::vector<Expr>{a * a, a + a}, 1);
  CHECK(two.num_slots() <= one.num_slots() + 2);
}

TEST_CASE("single-point domain errors") {
  Tape tape(std::vector<Expr>{parse("1/x0")}, 1);
  PhasePoint rho(1);
  CHECK_THROWS(tape.eval(rho));
}

TEST_CASE("batch kernels agree bitwise") {
  std::vector<Expr> outs{parse("x0^5*xi1 - sqrt(2 + x1^2)/(3 + xi0^2)"), parse("-(x0 + x1)*(xi0 - xi1)^2")};
  Tape tape(outs, 1);
  // Odd count exercises the tail path of the vector kernel.
  for (std::size_t count : {1u, 4u, 13u, 64u}) {
    Rng rng(9, count);
    std::vector<double> z(tape.num_vars() * count), a(2 * count), b(2 * count);
    for (double& v : z) v = rng.uniform(-2, 2);
    tape.eval_batch(z.data(), count, a.data(), Kernel::Scalar);
    tape.eval_batch(z.data(), count, b.data(), avx2_available() ? Kernel::Avx2 : Kernel::Scalar);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    for (std::size_t i = 0; i < count; ++i) {
      PhasePoint rho(1);
      for (std::size_t v = 0; v < tape.num_vars(); ++v) (v < 2 ? rho.x[v] : rho.xi[v - 2]) = z[v * count + i];
      CHECK(a[i] == doctest::Approx(eval(outs[0], rho)).epsilon(1e-14));
      CHECK(a[count + i] == doctest::Approx(eval(outs[1], rho)).epsilon(1e-14));
    }
  }
}

TEST_CASE("batch poles produce non-finite values") {
  Tape tape(std::vector<Expr>{parse("1/x0")}, 0);
  std::vector<double> z{0.0, 2.0, 0.0, 0.0}, out(2);
  tape.eval_batch(z.data(), 2, out.data(), Kernel::Scalar);
  CHECK(std::isinf(out[0]));
  CHECK(out[1] == 0.5);
}

TEST_CASE("kernel names") {
  CHECK(std::string(kernel_name(Kernel::Scalar)) != std::string(kernel_name(Kernel::Avx2)));
  CHECK(resolve_kernel(Kernel::Scalar) == Kernel::Scalar);
}
