#pragma once

#include <optional>
#include <vector>

#include "hypclass/builtins.hpp"
#include "hypclass/expr.hpp"
#include "hypclass/linalg.hpp"
#include "hypclass/system.hpp"

namespace hypclass {

struct BetaReport {
  int r = 0;
  std::vector<double> alpha1;  // alpha_{j1}(rho bar), j = 3..r
  std::vector<double> beta;    // beta_3..beta_r
  double orthogonality = 0.0;  // |sum_j beta_j alpha_{j1}|
  double fit_residual = 0.0;   // sup misfit of {xi0 - phi1, phi_j} = sum_k alpha_jk phi_k
  bool misfit = false;         // fit_residual above 1e-6
};

// Solves sum_k {phi_k, phi_j} beta_k = alpha_{j1}, j = 3..r, where
// block(k-3, j-3) = {phi_k, phi_j}(rho bar).
std::vector<double> beta_from_blocks(const Matrix& block, const std::vector<double>& alpha1);
// alpha_jk are fitted as affine functions on the given near-Sigma samples.
BetaReport beta_solve(const SymbolSystem& sys, const std::vector<PhasePoint>& samples);

// Replaces theta by an extension theta~ of theta|Sigma: with nu' = (theta - theta~)/2
// the rewrite phi~_1 = (1 + nu') phi_1 leaves p unchanged once
// (theta^ - theta~) phi~_1^2 is moved into R.
struct Prepared {
  SymbolSystem sys;
  Expr theta_tilde;
  Expr nu_prime;
  bool rewritten = false;
};
Prepared prepare_for_factorization(const SymbolSystem& sys, const std::optional<Expr>& theta_ext);

struct FactorOptions {
  double gamma = 1.0;  // <xi>_gamma = (gamma^2 + |xi'|^2)^(1/2)
  double lam = 0.0;    // 0 = auto: doubled from 1 until Q >= 0 on the samples
  int lam_cap_log2 = 10;
  double q_tol = 1e-14;
};

struct Factorization {
  int n = 0;
  Expr Lambda;      // xi0 - Lambda_hat
  Expr M;           // xi0 + Lambda_hat
  Expr Q;
  Expr Lambda_hat;  // phi1 (1 + ell) - lam phi1^3 <xi>^-2
  Expr weight;      // <xi>_gamma^-2
  Expr ell;
  BetaReport beta;
  double lam = 0.0;
  double gamma = 1.0;
  std::optional<SymbolSystem> prepared;
  Expr theta_tilde;
  double identity_residual = 0.0;  // max |p + Lambda M - Q| / (1 + |p|)
  double q_min = 0.0;
  std::size_t samples = 0;
};

// Samples are used for the beta fit, the lam auto-tune and the identity check.
Factorization build_factorization(const SymbolSystem& sys, const std::vector<PhasePoint>& samples,
                                  const FactorOptions& opt = {},
                                  const std::optional<Expr>& theta_ext = std::nullopt);
// Arbitrary Lambda, M, Q, e.g. for hand-checkable toys.
Factorization raw_factorization(int n, Expr Lambda, Expr M, Expr Q);

// Shell sups use this many times the region's sample count unless told otherwise.
inline constexpr int kShellOversample = 8;

struct ShellStat {
  double eps = 0.0;
  double c1 = 0.0;  // sup |{Lambda, Q}| / Q
  double c2 = 0.0;  // sup |{Lambda, M}| / (sqrt Q + |Lambda - M|)
  double q_min = 0.0;
  std::size_t samples = 0;
};

struct DefnOneReport {
  std::vector<ShellStat> shells;
  double C1 = 0.0, C2 = 0.0;
  // Ratios of the running sup (all shells at distance >= eps).
  double growth = 0.0;              // consecutive shells
  double growth_two_decades = 0.0;  // shells two apart
  bool pass = false;                // growth <= 2 and Q > 0 everywhere
};

// Shells are taken around Sigma of shell_sys.
DefnOneReport check_defn_one(const Factorization& f, const SymbolSystem& shell_sys, const Region& region,
                             int per_shell = 0);

struct SufficientShell {
  double eps = 0.0;
  double r1 = 0.0;  // |{xi0 - phi1, theta}| / (sqrt theta + |phi1| + sqrt|phi'|)^2
  double r2 = 0.0;  // |{{xi0 - phi1, phi2}, phi2}| / (sqrt theta + |phi1| + sqrt|phi'|)
  double theta_min = 0.0;
};

struct SufficientReport {
  std::vector<SufficientShell> shells;  // region shells plus two further decades
  double growth1 = 0.0, growth2 = 0.0;  // running-sup ratios over the three innermost shells
  bool cond1 = false, cond2 = false;
  bool theta_nonnegative = false;
  std::optional<DefnOneReport> implied;  // run when both conditions hold
  bool implication_ok = true;
};

// Uses the system as prepared (theta is the extension).
SufficientReport sufficient_conditions(const SymbolSystem& prepared, const Region& region,
                                       const FactorOptions& opt = {}, int per_shell = 0);

struct LowerBound {
  double c = 0.0;  // min Q / (|phi'|^2 + theta phi1^2 + phi1^4 <xi>^-2)
  std::size_t samples = 0;
};
LowerBound q_lower_bound(const Factorization& f, const std::vector<PhasePoint>& samples);

}  // namespace hypclass
