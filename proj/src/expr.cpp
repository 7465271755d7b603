#include "hypclass/expr.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "hypclass/error.hpp"
#include "ipow.hpp"

namespace hypclass {

struct ExprBuilder {
  static Expr make(Node node) { return Expr(std::make_shared<const Node>(std::move(node))); }
};

namespace {

Expr make_const(double v) {
  Node n{Op::Const};
  n.value = v;
  return ExprBuilder::make(std::move(n));
}

Expr make_binary(Op op, const Expr& a, const Expr& b) {
  Node n{op};
  n.a = a;
  n.b = b;
  return ExprBuilder::make(std::move(n));
}

Expr make_unary(Op op, const Expr& a, int exponent = 0) {
  Node n{op};
  n.a = a;
  n.exponent = exponent;
  return ExprBuilder::make(std::move(n));
}

}  // namespace

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  static const Expr zero = make_const(0.0);
  static const Expr one = make_const(1.0);
  if (value == 0.0 && !std::signbit(value)) {
    node_ = zero.node_;
  } else if (value == 1.0) {
    node_ = one.node_;
  } else {
    node_ = make_const(value).node_;
  }
}

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::var(Var v) {
  if (v.index < 0) throw Error(ErrorKind::Domain, "negative variable index");
  Node n{Op::Variable};
  n.var = v;
  return ExprBuilder::make(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return make_binary(Op::Add, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return make_unary(Op::Neg, a);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return make_binary(Op::Add, a, -b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return make_binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr(a.value() / b.value());
  if (a.is_constant(0.0) && !(b.is_constant(0.0))) return Expr(0.0);
  if (b.is_constant(1.0)) return a;
  return make_binary(Op::Div, a, b);
}

Expr pow(const Expr& a, int k) {
  if (k < 0) throw Error(ErrorKind::Domain, "negative exponent");
  if (k == 0) return Expr(1.0);
  if (k == 1) return a;
  if (a.is_constant()) return Expr(detail::ipow(a.value(), k));
  return make_unary(Op::Pow, a, k);
}

Expr sqrt(const Expr& a) {
  if (a.is_constant() && a.value() >= 0.0) return Expr(std::sqrt(a.value()));
  return make_unary(Op::Sqrt, a);
}

double PhasePoint::xi_prime_norm() const {
  double s = 0.0;
  for (std::size_t j = 1; j < xi.size(); ++j) s += xi[j] * xi[j];
  return std::sqrt(s);
}

PhasePoint PhasePoint::normalized() const {
  double norm = xi_prime_norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::Domain, "xi' vanishes; point is not in the cotangent cone");
  PhasePoint out = *this;
  for (double& v : out.xi) v /= norm;
  return out;
}

std::vector<double> PhasePoint::flat() const {
  std::vector<double> z(x);
  z.insert(z.end(), xi.begin(), xi.end());
  return z;
}

PhasePoint PhasePoint::from_flat(const double* z, int n) {
  PhasePoint p(n);
  for (int i = 0; i <= n; ++i) {
    p.x[i] = z[i];
    p.xi[i] = z[n + 1 + i];
  }
  return p;
}

Expr diff(const Expr& e, Var v) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> rec = [&](const Expr& f) -> Expr {
    auto it = memo.find(f.id());
    if (it != memo.end()) return it->second;
    Expr out;
    switch (f.op()) {
      case Op::Const: out = Expr(0.0); break;
      case Op::Variable: out = Expr(f.variable() == v ? 1.0 : 0.0); break;
      case Op::Add: out = rec(f.lhs()) + rec(f.rhs()); break;
      case Op::Mul: out = rec(f.lhs()) * f.rhs() + f.lhs() * rec(f.rhs()); break;
      case Op::Div: {
        Expr da = rec(f.lhs());
        Expr db = rec(f.rhs());
        out = (da * f.rhs() - f.lhs() * db) / pow(f.rhs(), 2);
        break;
      }
      case Op::Pow: {
        int k = f.exponent();
        out = Expr(static_cast<double>(k)) * pow(f.lhs(), k - 1) * rec(f.lhs());
        break;
      }
      case Op::Sqrt: out = rec(f.lhs()) / (Expr(2.0) * f); break;
      case Op::Neg: out = -rec(f.lhs()); break;
    }
    memo.emplace(f.id(), out);
    return out;
  };
  return rec(e);
}

int max_index(const Expr& e) {
  std::unordered_set<const Node*> seen;
  int best = -1;
  std::function<void(const Expr&)> rec = [&](const Expr& f) {
    if (f.empty() || !seen.insert(f.id()).second) return;
    if (f.op() == Op::Variable) best = std::max(best, f.variable().index);
    rec(f.lhs());
    rec(f.rhs());
  };
  rec(e);
  return best;
}

bool depends_on(const Expr& e, Var v) {
  std::unordered_set<const Node*> seen;
  std::function<bool(const Expr&)> rec = [&](const Expr& f) -> bool {
    if (f.empty() || !seen.insert(f.id()).second) return false;
    if (f.op() == Op::Variable) return f.variable() == v;
    return rec(f.lhs()) || rec(f.rhs());
  };
  return rec(e);
}

std::size_t node_count(const Expr& e) {
  std::unordered_set<const Node*> seen;
  std::function<void(const Expr&)> rec = [&](const Expr& f) {
    if (f.empty() || !seen.insert(f.id()).second) return;
    rec(f.lhs());
    rec(f.rhs());
  };
  rec(e);
  return seen.size();
}

Expr poisson(const Expr& f, const Expr& g) {
  int n = std::max(max_index(f), max_index(g));
  Expr out(0.0);
  for (int j = 0; j <= n; ++j) {
    Expr term = diff(f, Var::xi(j)) * diff(g, Var::x(j)) - diff(f, Var::x(j)) * diff(g, Var::xi(j));
    out = out + term;
  }
  return out;
}

double eval(const Expr& e, const PhasePoint& rho) {
  std::unordered_map<const Node*, double> memo;
  std::function<double(const Expr&)> rec = [&](const Expr& f) -> double {
    if (f.op() == Op::Const) return f.value();
    auto it = memo.find(f.id());
    if (it != memo.end()) return it->second;
    double out = 0.0;
    switch (f.op()) {
      case Op::Const: break;
      case Op::Variable: {
        Var v = f.variable();
        const auto& vec = v.kind == Var::Kind::X ? rho.x : rho.xi;
        if (v.index >= static_cast<int>(vec.size()))
          throw Error(ErrorKind::Domain, "variable index exceeds point dimension");
        out = vec[v.index];
        break;
      }
      case Op::Add: out = rec(f.lhs()) + rec(f.rhs()); break;
      case Op::Mul: out = rec(f.lhs()) * rec(f.rhs()); break;
      case Op::Div: {
        double num = rec(f.lhs());
        double den = rec(f.rhs());
        if (den == 0.0) throw Error(ErrorKind::Domain, "division by zero");
        out = num / den;
        break;
      }
      case Op::Pow: out = detail::ipow(rec(f.lhs()), f.exponent()); break;
      case Op::Sqrt: {
        double a = rec(f.lhs());
        if (a < 0.0) throw Error(ErrorKind::Domain, "square root of a negative value");
        out = std::sqrt(a);
        break;
      }
      case Op::Neg: out = -rec(f.lhs()); break;
    }
    memo.emplace(f.id(), out);
    return out;
  };
  return rec(e);
}

std::vector<Expr> hamilton_field(const Expr& f, int n) {
  std::vector<Expr> field;
  field.reserve(2 * (n + 1));
  for (int i = 0; i <= n; ++i) field.push_back(diff(f, Var::xi(i)));
  for (int i = 0; i <= n; ++i) field.push_back(-diff(f, Var::x(i)));
  return field;
}

Expr substitute(const Expr& e, Var v, const Expr& replacement) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> rec = [&](const Expr& f) -> Expr {
    auto it = memo.find(f.id());
    if (it != memo.end()) return it->second;
    Expr out;
    switch (f.op()) {
      case Op::Const: out = f; break;
      case Op::Variable: out = f.variable() == v ? replacement : f; break;
      case Op::Add: out = rec(f.lhs()) + rec(f.rhs()); break;
      case Op::Mul: out = rec(f.lhs()) * rec(f.rhs()); break;
      case Op::Div: out = rec(f.lhs()) / rec(f.rhs()); break;
      case Op::Pow: out = pow(rec(f.lhs()), f.exponent()); break;
      case Op::Sqrt: out = sqrt(rec(f.lhs())); break;
      case Op::Neg: out = -rec(f.lhs()); break;
    }
    memo.emplace(f.id(), out);
    return out;
  };
  return rec(e);
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Precedence levels: 1 sum, 2 product/quotient, 3 unary minus, 4 power, 5 atom.
int level(const Expr& e) {
  switch (e.op()) {
    case Op::Const: return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    case Op::Variable: return 5;
    case Op::Add: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Sqrt: return 5;
  }
  return 5;
}

void print(const Expr& e, int min_level, std::string& out) {
  bool paren = level(e) < min_level;
  if (paren) out += '(';
  switch (e.op()) {
    case Op::Const:
      out += format_number(e.value());
      break;
    case Op::Variable: {
      Var v = e.variable();
      out += v.kind == Var::Kind::X ? "x" : "xi";
      out += std::to_string(v.index);
      break;
    }
    case Op::Add: {
      print(e.lhs(), 1, out);
      const Expr& b = e.rhs();
      if (b.op() == Op::Neg) {
        out += " - ";
        print(b.lhs(), 2, out);
      } else if (b.is_constant() && std::signbit(b.value())) {
        out += " - ";
        out += format_number(-b.value());
      } else {
        out += " + ";
        print(b, 2, out);
      }
      break;
    }
    case Op::Mul:
      print(e.lhs(), 2, out);
      out += '*';
      print(e.rhs(), 3, out);
      break;
    case Op::Div:
      print(e.lhs(), 2, out);
      out += '/';
      print(e.rhs(), 3, out);
      break;
    case Op::Neg:
      out += '-';
      print(e.lhs(), 3, out);
      break;
    case Op::Pow:
      print(e.lhs(), 5, out);
      out += '^';
      out += std::to_string(e.exponent());
      break;
    case Op::Sqrt:
      out += "sqrt(";
      print(e.lhs(), 1, out);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 1, out);
  return out;
}

}  // namespace hypclass
