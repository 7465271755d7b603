#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hypclass {

struct Var {
  enum class Kind : unsigned char { X, Xi };
  Kind kind = Kind::X;
  int index = 0;

  static Var x(int i) { return {Kind::X, i}; }
  static Var xi(int i) { return {Kind::Xi, i}; }
  bool operator==(const Var&) const = default;
};

enum class Op : unsigned char { Const, Variable, Add, Mul, Div, Pow, Sqrt, Neg };

struct Node;

// Immutable expression DAG. Copies share nodes.
class Expr {
 public:
  Expr();  // the constant 0
  Expr(double value);  // NOLINT: implicit by design, lets 2*e read naturally

  // Empty handle; only used for missing operands inside Node.
  static Expr none() { return Expr(std::shared_ptr<const Node>()); }
  bool empty() const { return !node_; }

  static Expr constant(double value);
  static Expr var(Var v);
  static Expr x(int i) { return var(Var::x(i)); }
  static Expr xi(int i) { return var(Var::xi(i)); }

  Op op() const;
  double value() const;    // Const only
  Var variable() const;    // Variable only
  int exponent() const;    // Pow only
  const Expr& lhs() const; // first operand
  const Expr& rhs() const; // second operand of Add/Mul/Div

  bool is_constant() const { return op() == Op::Const; }
  bool is_constant(double v) const { return is_constant() && value() == v; }
  const Node* id() const { return node_.get(); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, int k);
  friend Expr sqrt(const Expr& a);

 private:
  friend struct ExprBuilder;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op;
  double value = 0.0;
  Var var{};
  int exponent = 0;
  Expr a = Expr::none();
  Expr b = Expr::none();
};

inline Op Expr::op() const { return node_->op; }
inline double Expr::value() const { return node_->value; }
inline Var Expr::variable() const { return node_->var; }
inline int Expr::exponent() const { return node_->exponent; }
inline const Expr& Expr::lhs() const { return node_->a; }
inline const Expr& Expr::rhs() const { return node_->b; }

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int k);
Expr sqrt(const Expr& a);

// A point (x, xi) of R^{n+1} x R^{n+1}; xi' = (xi_1..xi_n) must be nonzero.
struct PhasePoint {
  std::vector<double> x;
  std::vector<double> xi;

  PhasePoint() = default;
  explicit PhasePoint(int n) : x(n + 1, 0.0), xi(n + 1, 0.0) {}
  PhasePoint(std::vector<double> x_, std::vector<double> xi_)
      : x(std::move(x_)), xi(std::move(xi_)) {}

  int n() const { return static_cast<int>(x.size()) - 1; }
  double xi_prime_norm() const;
  PhasePoint normalized() const;  // |xi'| = 1 representative
  double& operator[](Var v) { return v.kind == Var::Kind::X ? x[v.index] : xi[v.index]; }
  double operator[](Var v) const { return v.kind == Var::Kind::X ? x[v.index] : xi[v.index]; }

  // Flat layout used by tapes and integrators: x0..xn, xi0..xin.
  std::vector<double> flat() const;
  static PhasePoint from_flat(const double* z, int n);
};

struct ParseContext {
  int n = -1;  // resolves the aliases xn / xin; -1 means unavailable
  std::map<std::string, double> params;
};

Expr parse(std::string_view text, const ParseContext& ctx = {});
std::string to_string(const Expr& e);

Expr diff(const Expr& e, Var v);
// {f,g} = sum_j (df/dxi_j dg/dx_j - df/dx_j dg/dxi_j), so {xi_0, x_0} = 1.
Expr poisson(const Expr& f, const Expr& g);
double eval(const Expr& e, const PhasePoint& rho);
// (df/dxi_0..df/dxi_n | -df/dx_0..-df/dx_n), flat layout order.
std::vector<Expr> hamilton_field(const Expr& f, int n);
Expr substitute(const Expr& e, Var v, const Expr& replacement);

// Highest variable index referenced, -1 for constants.
int max_index(const Expr& e);
bool depends_on(const Expr& e, Var v);
std::size_t node_count(const Expr& e);

}  // namespace hypclass
