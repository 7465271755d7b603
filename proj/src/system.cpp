#include "hypclass/system.hpp"

#include <algorithm>
#include <cmath>

#include "hypclass/error.hpp"

namespace hypclass {

struct SymbolSystem::Compiled {
  Expr p;
  Tape p_tape;
  Tape phi_tape;      // phi_0..phi_d
  Tape bracket_tape;  // {phi_i, phi_j}, i < j, row-major upper triangle
  Tape hess_tape;     // upper triangle of Hess p
  Tape jac_tape;      // d phi_i / d z_k
  Tape field_tape;
  Tape theta_tape;
};

namespace {

Var flat_var(int k, int n) { return k <= n ? Var::x(k) : Var::xi(k - n - 1); }

}  // namespace

SymbolSystem::SymbolSystem(SymbolSpec spec) : spec_(std::move(spec)) {
  const int n = spec_.n;
  if (n < 1) throw Error(ErrorKind::Precondition, "dimension n must be at least 1");
  if (spec_.phis.empty()) throw Error(ErrorKind::Precondition, "at least one phi is required");
  auto check_dim = [&](const Expr& e, const char* what) {
    if (max_index(e) > n) throw Error(ErrorKind::Precondition, std::string(what) + " uses a variable beyond x_n / xi_n");
  };
  for (const auto& f : spec_.phis) check_dim(f, "phi");
  if (spec_.theta) check_dim(*spec_.theta, "theta");
  if (spec_.remainder) check_dim(*spec_.remainder, "R");
  if (spec_.base_point.x.empty()) {
    spec_.base_point = PhasePoint(n);
    spec_.base_point.xi[n] = 1.0;
  }
  if (spec_.base_point.n() != n) throw Error(ErrorKind::Precondition, "base point dimension does not match n");

  auto c = std::make_shared<Compiled>();
  const int d = static_cast<int>(spec_.phis.size());
  const int N = 2 * (n + 1);
  Expr theta = spec_.theta ? *spec_.theta : Expr(0.0);
  Expr p = -pow(Expr::xi(0), 2) + (Expr(1.0) + theta) * pow(spec_.phis[0], 2);
  for (int j = 1; j < d; ++j) p = p + pow(spec_.phis[j], 2);
  if (spec_.remainder) p = p + *spec_.remainder;
  c->p = p;
  c->p_tape = Tape(std::span<const Expr>(&c->p, 1), n);

  std::vector<Expr> phis{Expr::xi(0)};
  phis.insert(phis.end(), spec_.phis.begin(), spec_.phis.end());
  c->phi_tape = Tape(phis, n);

  std::vector<Expr> brackets;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) brackets.push_back(poisson(phis[i], phis[j]));
  c->bracket_tape = Tape(brackets, n);

  std::vector<Expr> grad(N);
  for (int k = 0; k < N; ++k) grad[k] = diff(p, flat_var(k, n));
  std::vector<Expr> hess;
  for (int k = 0; k < N; ++k)
    for (int l = k; l < N; ++l) hess.push_back(diff(grad[k], flat_var(l, n)));
  c->hess_tape = Tape(hess, n);

  std::vector<Expr> jac;
  for (int i = 0; i <= d; ++i)
    for (int k = 0; k < N; ++k) jac.push_back(diff(phis[i], flat_var(k, n)));
  c->jac_tape = Tape(jac, n);

  c->field_tape = Tape(hamilton_field(p, n), n);
  c->theta_tape = Tape(std::span<const Expr>(&theta, 1), n);
  c_ = std::move(c);

  const PhasePoint& rho = spec_.base_point;
  if (!(rho.xi_prime_norm() > 0.0)) throw Error(ErrorKind::Precondition, "base point has xi' = 0");
  RankInfo rank = numeric_rank(phi_jacobian(rho));
  if (rank.rank != d + 1)
    throw Error(ErrorKind::Degenerate, "d phi_0..d phi_d are linearly dependent at the base point");
  if (spec_.theta && !(1.0 + theta_value(rho) > 0.0))
    throw Error(ErrorKind::Precondition, "1 + theta must be positive at the base point");
}

Expr SymbolSystem::phi(int j) const { return j == 0 ? Expr::xi(0) : spec_.phis.at(j - 1); }

const Expr& SymbolSystem::symbol() const { return c_->p; }

double SymbolSystem::p(const PhasePoint& rho) const { return c_->p_tape.eval1(rho); }

double SymbolSystem::theta_value(const PhasePoint& rho) const { return c_->theta_tape.eval1(rho); }

std::vector<double> SymbolSystem::phi_values(const PhasePoint& rho) const { return c_->phi_tape.eval(rho); }

Matrix SymbolSystem::bracket_matrix(const PhasePoint& rho) const {
  const int d = this->d();
  auto v = c_->bracket_tape.eval(rho);
  Matrix a(d + 1, d + 1);
  std::size_t k = 0;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      a(i, j) = v[k];
      a(j, i) = -v[k];
      ++k;
    }
  return a;
}

Matrix SymbolSystem::hessian(const PhasePoint& rho) const {
  const std::size_t N = dim();
  auto v = c_->hess_tape.eval(rho);
  Matrix h(N, N);
  std::size_t k = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i; j < N; ++j) {
      h(i, j) = v[k];
      h(j, i) = v[k];
      ++k;
    }
  return h;
}

Matrix SymbolSystem::phi_jacobian(const PhasePoint& rho) const {
  const std::size_t N = dim();
  auto v = c_->jac_tape.eval(rho);
  Matrix j(d() + 1, N);
  for (std::size_t i = 0; i < j.rows(); ++i)
    for (std::size_t k = 0; k < N; ++k) j(i, k) = v[i * N + k];
  return j;
}

const Tape& SymbolSystem::field_tape() const { return c_->field_tape; }

std::vector<double> SymbolSystem::field(const double* z) const {
  std::vector<double> out(dim());
  c_->field_tape.eval(z, out.data());
  return out;
}

ConstraintSolver::ConstraintSolver(std::vector<Expr> funcs, int n, std::vector<Var> frozen)
    : n_(n), m_(funcs.size()), free_(2 * (n + 1), true) {
  for (Var v : frozen) free_[v.kind == Var::Kind::X ? v.index : n + 1 + v.index] = false;
  const int N = 2 * (n + 1);
  std::vector<Expr> all = funcs;
  for (const auto& f : funcs)
    for (int k = 0; k < N; ++k) all.push_back(diff(f, flat_var(k, n)));
  tape_ = Tape(all, n);
}

PhasePoint ConstraintSolver::solve(const PhasePoint& start, const std::vector<double>& targets, double tol,
                                   int max_iter) const {
  const std::size_t N = free_.size();
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < N; ++k)
    if (free_[k]) cols.push_back(k);
  std::vector<double> z = start.flat();
  std::vector<double> out(m_ * (1 + N));
  double scale = 1.0;
  for (double t : targets) scale = std::max(scale, std::abs(t));

  auto residual = [&](const std::vector<double>& zz, std::vector<double>& r) {
    tape_.eval(zz.data(), out.data());
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      r[i] = out[i] - targets[i];
      worst = std::max(worst, std::abs(r[i]));
    }
    return worst;
  };

  std::vector<double> r(m_);
  double err = residual(z, r);
  for (int it = 0; it < max_iter; ++it) {
    if (err <= tol * scale) return PhasePoint::from_flat(z.data(), n_);
    Matrix jac(m_, cols.size());
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t c = 0; c < cols.size(); ++c) jac(i, c) = out[m_ + i * N + cols[c]];
    std::vector<double> step = least_squares(jac, r);
    double lambda = 1.0;
    bool improved = false;
    std::vector<double> trial(N), rt(m_);
    for (int half = 0; half < 30; ++half) {
      trial = z;
      for (std::size_t c = 0; c < cols.size(); ++c) trial[cols[c]] -= lambda * step[c];
      double e2;
      try {
        e2 = residual(trial, rt);
      } catch (const Error&) {
        e2 = HUGE_VAL;
      }
      if (e2 < err || (e2 <= tol * scale)) {
        improved = true;
        z = trial;
        r = rt;
        err = e2;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (err <= tol * scale) return PhasePoint::from_flat(z.data(), n_);
  // A stagnating residual at rounding level still counts as converged.
  if (err <= 1e3 * tol * scale) return PhasePoint::from_flat(z.data(), n_);
  throw Error(ErrorKind::Convergence, "Newton projection did not converge (residual " + num(err) + ")");
}

PhasePoint project_to_sigma(const SymbolSystem& sys, const PhasePoint& start, const ProjectOptions& opt) {
  std::vector<Expr> funcs;
  if (opt.include_xi0) funcs.push_back(Expr::xi(0));
  funcs.insert(funcs.end(), sys.phis().begin(), sys.phis().end());
  ConstraintSolver solver(funcs, sys.n(), opt.frozen);
  PhasePoint rho = solver.solve(start, std::vector<double>(funcs.size(), 0.0), opt.tol);
  if (opt.normalize) rho = rho.normalized();
  return rho;
}

double sigma_residual(const SymbolSystem& sys, const PhasePoint& rho, bool include_xi0) {
  PhasePoint r = rho.normalized();
  auto v = sys.phi_values(r);
  double worst = 0.0;
  for (std::size_t j = include_xi0 ? 0 : 1; j < v.size(); ++j) worst = std::max(worst, std::abs(v[j]));
  return worst;
}

void require_on_sigma(const SymbolSystem& sys, const PhasePoint& rho, double tol) {
  double res = sigma_residual(sys, rho);
  if (res > tol)
    throw Error(ErrorKind::NotOnSigma, "point is not on Sigma (max |phi_j| = " + num(res) + ")");
}

}  // namespace hypclass
