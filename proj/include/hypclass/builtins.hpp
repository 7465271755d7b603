#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypclass/expr.hpp"
#include "hypclass/rng.hpp"
#include "hypclass/system.hpp"

namespace hypclass {

struct Region {
  double box = 0.05;  // half-width of the sampling box around the base point
  int samples = 50;
  std::uint64_t seed = 42;
  std::vector<double> shells{1e-1, 1e-2, 1e-3, 1e-4};
  Var sweep_var = Var::x(2);
  double sweep_lo = -0.2;
  double sweep_hi = 0.2;
  int sweep_steps = 41;
};

struct Problem {
  std::string label;
  SymbolSystem sys;
  Region region;
  std::optional<Expr> nu;         // rei3 perturbation, or the [nu] section
  std::optional<Expr> theta_ext;  // extension of theta|Sigma off Sigma
  std::vector<Expr> tangency;     // k_i whose order along a tangent curve is reported
  std::map<std::string, std::string> params;
};

// rei1 [n=2] [theta=<expr>], rei2 [k=1] [frame=raw|normal] [theta=<expr>],
// rei3 [k=1] [nu=<expr>].
Problem builtin(const std::string& name, const std::map<std::string, std::string>& kv = {});
bool is_builtin(const std::string& name);
std::vector<std::string> builtin_names();

// Sampling. Each helper uses its own RNG stream so sets are independent.
PhasePoint box_point(const PhasePoint& base, double box, Rng& rng);
std::vector<PhasePoint> neighborhood_samples(const SymbolSystem& sys, const Region& region, int count,
                                             std::uint64_t stream);
// Newton-projected onto Sigma (include_xi0) or Sigma'; failed projections are redrawn.
std::vector<PhasePoint> sigma_samples(const SymbolSystem& sys, const Region& region, int count,
                                      std::uint64_t stream, bool include_xi0 = true,
                                      const std::vector<Var>& frozen = {});
// Points with xi_0 and phi_j set to random targets of size between eps^2 and eps.
std::vector<PhasePoint> shell_samples(const SymbolSystem& sys, const Region& region, double eps, int count,
                                      std::uint64_t stream);
// Sigma points with lo <= |v| <= hi (random sign), v held fixed by the projection.
std::vector<PhasePoint> pinned_samples(const SymbolSystem& sys, const Region& region, Var v, double lo, double hi,
                                       int count, std::uint64_t stream);
// Sigma points with the sweep variable pinned on an even grid.
std::vector<PhasePoint> sweep_points(const SymbolSystem& sys, const Region& region);

}  // namespace hypclass
