#include "hypclass/builtins.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "hypclass/error.hpp"

namespace hypclass {

namespace {

int int_param(const std::map<std::string, std::string>& kv, const std::string& key, int fallback, int lo, int hi) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  int v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size() || v < lo || v > hi)
    throw Error(ErrorKind::Precondition,
                key + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

void reject_unknown(const std::map<std::string, std::string>& kv, std::initializer_list<const char*> allowed,
                    const std::string& name) {
  for (const auto& [key, value] : kv) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::Precondition, "unknown parameter '" + key + "' for " + name);
  }
}

std::string describe(const std::string& name, const std::map<std::string, std::string>& kv) {
  std::string s = name;
  for (const auto& [k, v] : kv) s += " " + k + "=" + v;
  return s;
}

Expr xin(int n) { return Expr::xi(n); }

Problem make_rei1(const std::map<std::string, std::string>& kv) {
  reject_unknown(kv, {"n", "theta"}, "rei1");
  const int n = int_param(kv, "n", 2, 2, 16);
  ParseContext ctx{n, {}};
  SymbolSpec spec;
  spec.name = "rei1";
  spec.n = n;
  spec.phis = {Expr::xi(1), (Expr::x(0) + Expr::x(1)) * xin(n)};
  spec.theta = kv.count("theta") ? parse(kv.at("theta"), ctx) : Expr::x(2);
  Problem pb{describe("rei1", kv), SymbolSystem(std::move(spec)), {}, {}, {}, {}, kv};
  return pb;
}

Problem make_rei2(const std::map<std::string, std::string>& kv) {
  reject_unknown(kv, {"k", "frame", "theta"}, "rei2");
  const int k = int_param(kv, "k", 1, 1, 12);
  const int n = 3;
  const double kd = k;
  std::string frame = kv.count("frame") ? kv.at("frame") : "raw";
  if (frame != "raw" && frame != "normal") throw Error(ErrorKind::Precondition, "frame must be raw or normal");
  Expr x0 = Expr::x(0), x1 = Expr::x(1), x2 = Expr::x(2);
  Expr g = Expr(1.0) - pow(x2, k) / kd;
  Expr a = x0 * pow(x2, k - 1);
  SymbolSpec spec;
  spec.name = "rei2";
  spec.n = n;
  Expr phi2 = (x0 + x1 - x0 * pow(x2, k) / kd) * xin(n);
  if (frame == "raw") {
    if (kv.count("theta")) throw Error(ErrorKind::Precondition, "theta override needs frame=normal");
    spec.phis = {Expr::xi(1), phi2, Expr::xi(2)};
  } else {
    Expr rho2 = Expr(1.0) / (Expr(1.0) + pow(a, 2));
    Expr rho = sqrt(rho2);
    spec.phis = {g * rho2 * (Expr::xi(1) - a * Expr::xi(2)), phi2, rho * (a * Expr::xi(1) + Expr::xi(2))};
    if (kv.count("theta")) {
      spec.theta = parse(kv.at("theta"), ParseContext{n, {}});
    } else {
      spec.theta = (Expr(2.0) * pow(x2, k) / kd + pow(x0, 2) * pow(x2, 2 * (k - 1)) - pow(x2, 2 * k) / (kd * kd)) /
                   pow(g, 2);
    }
  }
  Problem pb{describe("rei2", kv), SymbolSystem(std::move(spec)), {}, {}, {}, {}, kv};
  return pb;
}

Problem make_rei3(const std::map<std::string, std::string>& kv) {
  reject_unknown(kv, {"k", "nu"}, "rei3");
  const int k = int_param(kv, "k", 1, 1, 12);
  const int n = 3;
  const double kd = k;
  Expr x1 = Expr::x(1);
  Expr nu = kv.count("nu") ? parse(kv.at("nu"), ParseContext{n, {}}) : Expr(0.0);
  if (depends_on(nu, Var::x(1)) || max_index(nu) > n)
    throw Error(ErrorKind::Precondition, "nu must be a function of x0, x2, x3 only");
  Expr xk = pow(x1, k);
  Expr denom = Expr(1.0) + (1.0 + kd / 2.0) * xk;
  Expr alpha = (Expr(1.0) + xk) / denom;
  SymbolSpec spec;
  spec.name = "rei3";
  spec.n = n;
  spec.phis = {-(x1 * (Expr(1.0) + xk) * xin(n)) / denom, Expr::xi(1) + Expr::x(0) * xin(n)};
  Expr theta = (1.0 + kd) * xk + (kd * kd) * pow(x1, 2 * k) / (Expr(4.0) * (Expr(1.0) + xk));
  if (!nu.is_constant(0.0)) theta = theta + nu / pow(alpha, 2);
  spec.theta = theta;
  Problem pb{describe("rei3", kv), SymbolSystem(std::move(spec)), {}, {}, {}, {}, kv};
  pb.nu = nu;
  pb.theta_ext = substitute(theta, Var::x(1), Expr(0.0));
  pb.tangency = {Expr::x(2)};
  return pb;
}

}  // namespace

Problem builtin(const std::string& name, const std::map<std::string, std::string>& kv) {
  if (name == "rei1") return make_rei1(kv);
  if (name == "rei2") return make_rei2(kv);
  if (name == "rei3") return make_rei3(kv);
  throw Error(ErrorKind::Precondition, "unknown built-in '" + name + "'");
}

bool is_builtin(const std::string& name) { return name == "rei1" || name == "rei2" || name == "rei3"; }

std::vector<std::string> builtin_names() { return {"rei1", "rei2", "rei3"}; }

PhasePoint box_point(const PhasePoint& base, double box, Rng& rng) {
  PhasePoint p = base;
  for (double& v : p.x) v += rng.uniform(-box, box);
  for (double& v : p.xi) v += rng.uniform(-box, box);
  return p;
}

std::vector<PhasePoint> neighborhood_samples(const SymbolSystem& sys, const Region& region, int count,
                                             std::uint64_t stream) {
  Rng rng(region.seed, stream);
  PhasePoint base = sys.base_point().normalized();
  std::vector<PhasePoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(box_point(base, region.box, rng).normalized());
  return out;
}

std::vector<PhasePoint> sigma_samples(const SymbolSystem& sys, const Region& region, int count,
                                      std::uint64_t stream, bool include_xi0, const std::vector<Var>& frozen) {
  Rng rng(region.seed, stream);
  PhasePoint base = sys.base_point().normalized();
  ProjectOptions opt;
  opt.include_xi0 = include_xi0;
  opt.frozen = frozen;
  std::vector<PhasePoint> out;
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    PhasePoint start = box_point(base, region.box, rng);
    try {
      out.push_back(project_to_sigma(sys, start, opt));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Convergence && e.kind() != ErrorKind::Domain) throw;
      if (++failures > 10 * count) throw;
    }
  }
  return out;
}

std::vector<PhasePoint> shell_samples(const SymbolSystem& sys, const Region& region, double eps, int count,
                                      std::uint64_t stream) {
  Rng rng(region.seed, stream);
  PhasePoint base = sys.base_point().normalized();
  std::vector<Expr> funcs{Expr::xi(0)};
  funcs.insert(funcs.end(), sys.phis().begin(), sys.phis().end());
  ConstraintSolver solver(funcs, sys.n());
  std::vector<PhasePoint> out;
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    PhasePoint start = box_point(base, region.box, rng);
    std::vector<double> targets(funcs.size());
    for (double& t : targets) t = rng.sign() * std::pow(eps, 1.0 + rng.uniform());
    try {
      out.push_back(solver.solve(start, targets, 1e-12));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Convergence && e.kind() != ErrorKind::Domain) throw;
      if (++failures > 10 * count) throw;
    }
  }
  return out;
}

std::vector<PhasePoint> pinned_samples(const SymbolSystem& sys, const Region& region, Var v, double lo, double hi,
                                       int count, std::uint64_t stream) {
  Rng rng(region.seed, stream);
  PhasePoint base = sys.base_point().normalized();
  ProjectOptions opt;
  opt.frozen = {v};
  std::vector<PhasePoint> out;
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    PhasePoint start = box_point(base, region.box, rng);
    start[v] = rng.sign() * rng.uniform(lo, hi);
    try {
      out.push_back(project_to_sigma(sys, start, opt));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Convergence && e.kind() != ErrorKind::Domain) throw;
      if (++failures > 10 * count) throw;
    }
  }
  return out;
}

std::vector<PhasePoint> sweep_points(const SymbolSystem& sys, const Region& region) {
  if (region.sweep_steps < 2) throw Error(ErrorKind::Precondition, "sweep needs at least 2 steps");
  PhasePoint base = sys.base_point().normalized();
  ProjectOptions opt;
  opt.frozen = {region.sweep_var};
  std::vector<PhasePoint> out;
  for (int i = 0; i < region.sweep_steps; ++i) {
    double v = region.sweep_lo + (region.sweep_hi - region.sweep_lo) * i / (region.sweep_steps - 1);
    // Snap the midpoint of a symmetric grid to an exact zero.
    if (std::abs(v) < 1e-14 * std::max(std::abs(region.sweep_lo), std::abs(region.sweep_hi))) v = 0.0;
    PhasePoint start = base;
    if (region.sweep_var.kind == Var::Kind::X)
      start.x.at(region.sweep_var.index) = v;
    else
      start.xi.at(region.sweep_var.index) = v;
    out.push_back(project_to_sigma(sys, start, opt));
  }
  return out;
}

}  // namespace hypclass
