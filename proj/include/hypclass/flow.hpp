#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hypclass/expr.hpp"
#include "hypclass/linalg.hpp"
#include "hypclass/spectral.hpp"
#include "hypclass/system.hpp"

namespace hypclass {

struct Trajectory {
  int n = 0;
  std::vector<double> s;
  std::vector<std::vector<double>> z;  // flat (x, xi) per sample
  std::vector<double> p;
  bool x0_parametrized = false;  // set by reparametrize_x0
  double p0 = 0.0;
  double max_drift = 0.0;  // max |p - p0|

  std::size_t size() const { return s.size(); }
  PhasePoint point(std::size_t i) const { return PhasePoint::from_flat(z[i].data(), n); }
};

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h0 = 0.0;             // 0 picks an initial step from the field size
  double max_step_rel = 0.0;   // cap h by this fraction of |s| (log-spaced output)
  double min_step = 1e-14;
  std::size_t max_steps = 2000000;
  double stop_x0 = std::numeric_limits<double>::infinity();  // stop once |x0| exceeds this
};

// Dormand-Prince 5(4) for the Hamilton field of p from s0 to s1 (either direction).
Trajectory integrate(const SymbolSystem& sys, const PhasePoint& rho0, double s0, double s1,
                     const IntegrateOptions& opt = {});

// Checks that x0 is strictly monotone with |dx0/ds| not collapsing; throws
// Precondition otherwise.
void reparametrize_x0(Trajectory& traj);

struct OrderFit {
  double order = 0.0;  // slope of log|f| against log|x0|; +inf if f vanishes identically
  double limit = 0.0;  // f / x0^m at the smallest |x0| in the window
  double rms = 0.0;    // residual of the log-log fit
  std::size_t points = 0;
  bool identically_zero = false;
};

// Window [lo, hi] in |x0| must span at least one decade.
OrderFit vanishing_order(const Trajectory& traj, const Expr& f, double lo, double hi, double m = 0.0);

struct BRoots {
  std::vector<double> roots;
  double b = 0.0;
};
// Real nonzero roots of 1/delta - kappa b + nu delta b^2 = 0. For nu > 0 the
// root with the smaller delta kappa b is selected; otherwise the same rule
// breaks the tie deterministically.
BRoots b_roots(double kappa, double nu, double delta);

struct LeadingConstants {
  double x0 = 0.0, phi1 = 0.0, phi2 = 0.0, theta = 0.0, xi0 = 0.0;
  double residual_independent = 0.0;  // constant-term system with Theta
  double residual_dependent = 0.0;    // Theta replaced by -nu X0^2 / 4
};
LeadingConstants leading_constants(double b, double kappa, double nu, double delta);

enum class FlowCase { Independent, Dependent };
const char* to_string(FlowCase c);

struct AIReport {
  Matrix A;
  Spectrum eigenvalues;
  std::vector<double> charpoly;
  std::vector<double> expected;
  double charpoly_residual = 0.0;  // max coefficient error relative to max(1, |expected|)
  bool has_one = false;
  bool others_negative = false;  // every other real eigenvalue < 0
};
AIReport a_I_matrix(double kappa, double nu, double delta, double b, FlowCase c);

struct TransitionOptions {
  double tol = 1e-8;         // precondition residuals, scaled by max(1, |brackets|)
  double dependence_tol = 1e-7;
};

struct TransitionAnalysis {
  double nu = 0.0;
  double kappa = 0.0;
  double delta = 0.0;
  double discriminant = 0.0;
  bool exists_tangent = false;
  FlowCase flow_case = FlowCase::Dependent;
  double dependence_residual = 0.0;
  double theta_base = 0.0;             // theta(rho bar)
  double precondition_residual = 0.0;  // |theta|, |{xi0-phi1, theta}|, |{phi_j, theta}| (j > r) at rho bar
  int r = 0;
  std::optional<BRoots> roots;
  std::optional<LeadingConstants> leading;
  std::optional<AIReport> a_I;
};

// Invariants at the base point; theta defaults to the system's theta.
TransitionAnalysis transition_invariants(const SymbolSystem& sys, const TransitionOptions& opt = {},
                                         const std::optional<Expr>& theta = std::nullopt);

struct TangentOptions {
  std::vector<double> seeds{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  double fit_hi = 3e-2;        // outer end of the |x0| window
  double window_factor = 3.0;  // inner end is this times |x0| at the seed
  IntegrateOptions integ;
};

struct NamedOrder {
  std::string name;
  OrderFit fit;
};

struct SeedResult {
  double t0 = 0.0;
  double quality = 0.0;  // mean log-fit rms of phi_1 and phi_2; smaller is better
  bool ok = false;
  std::string failure;
};

struct TangentResult {
  double t0 = 0.0;
  double b = 0.0;
  Trajectory away;    // from the seed outward (decreasing s)
  Trajectory toward;  // from the seed toward rho bar (s0 to 2 s0)
  double toward_x0_ratio = 0.0;  // |x0| at the end of `toward` over |x0| at the seed
  double window_lo = 0.0, window_hi = 0.0;
  std::vector<NamedOrder> orders;  // xi0, phi_1..phi_d, theta, then k_i
  std::vector<SeedResult> seeds;
  double p_drift = 0.0;
};

TangentResult tangent_search(const SymbolSystem& sys, const TransitionAnalysis& analysis,
                             const std::vector<Expr>& tangency = {}, const TangentOptions& opt = {});

// CSV columns s,t,x0..xn,xi0..xin,p,phi1..phid,theta.
void write_csv(std::ostream& os, const SymbolSystem& sys, const Trajectory& traj);

}  // namespace hypclass
