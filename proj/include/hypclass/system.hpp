#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypclass/expr.hpp"
#include "hypclass/linalg.hpp"
#include "hypclass/tape.hpp"

namespace hypclass {

struct SymbolSpec {
  std::string name;
  int n = 0;
  std::vector<Expr> phis;  // phi_1..phi_d; phi_0 = xi_0 is implicit
  std::optional<Expr> theta;
  std::optional<Expr> remainder;
  PhasePoint base_point;
  std::optional<int> declared_rank;
};

// p = -xi_0^2 + (1+theta) phi_1^2 + sum_{j>=2} phi_j^2 + R.
// Immutable after construction; the compiled tapes are shared between copies.
class SymbolSystem {
 public:
  explicit SymbolSystem(SymbolSpec spec);

  const std::string& name() const { return spec_.name; }
  int n() const { return spec_.n; }
  int d() const { return static_cast<int>(spec_.phis.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(2 * (spec_.n + 1)); }
  const std::vector<Expr>& phis() const { return spec_.phis; }
  Expr phi(int j) const;  // j = 0 gives xi_0
  const std::optional<Expr>& theta() const { return spec_.theta; }
  Expr theta_or_zero() const { return spec_.theta ? *spec_.theta : Expr(0.0); }
  const std::optional<Expr>& remainder() const { return spec_.remainder; }
  const PhasePoint& base_point() const { return spec_.base_point; }
  std::optional<int> declared_rank() const { return spec_.declared_rank; }
  const SymbolSpec& spec() const { return spec_; }
  const Expr& symbol() const;

  double p(const PhasePoint& rho) const;
  double theta_value(const PhasePoint& rho) const;
  std::vector<double> phi_values(const PhasePoint& rho) const;  // phi_0..phi_d
  Matrix bracket_matrix(const PhasePoint& rho) const;            // {phi_i, phi_j}, 0..d
  Matrix hessian(const PhasePoint& rho) const;                   // flat layout
  Matrix phi_jacobian(const PhasePoint& rho) const;              // (d+1) x 2(n+1)
  const Tape& field_tape() const;                                // Hamilton field of p
  std::vector<double> field(const double* z) const;

  // Copy with a different set of defining functions or theta.
  SymbolSystem with(SymbolSpec changed) const { return SymbolSystem(std::move(changed)); }

 private:
  struct Compiled;
  SymbolSpec spec_;
  std::shared_ptr<const Compiled> c_;
};

// Gauss-Newton with a minimum-norm (pseudo-inverse) step for f(z) = targets.
class ConstraintSolver {
 public:
  ConstraintSolver(std::vector<Expr> funcs, int n, std::vector<Var> frozen = {});
  PhasePoint solve(const PhasePoint& start, const std::vector<double>& targets, double tol = 1e-13,
                   int max_iter = 80) const;
  std::size_t size() const { return m_; }

 private:
  int n_;
  std::size_t m_;
  std::vector<bool> free_;
  Tape tape_;  // values then row-major Jacobian
};

struct ProjectOptions {
  bool include_xi0 = true;   // false projects onto Sigma' (xi_0 left free)
  std::vector<Var> frozen;   // coordinates Newton may not move
  bool normalize = true;     // rescale to |xi'| = 1 afterwards
  double tol = 1e-13;
};

PhasePoint project_to_sigma(const SymbolSystem& sys, const PhasePoint& start, const ProjectOptions& opt = {});

inline constexpr double kSigmaTol = 1e-8;
// Max |phi_j| (and |xi_0| unless include_xi0 is false) at the normalized point.
double sigma_residual(const SymbolSystem& sys, const PhasePoint& rho, bool include_xi0 = true);
void require_on_sigma(const SymbolSystem& sys, const PhasePoint& rho, double tol = kSigmaTol);

}  // namespace hypclass
