#include "hypclass/tape.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <tuple>
#include <unordered_map>

#include "hypclass/error.hpp"
#include "ipow.hpp"

namespace hypclass {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

Kernel resolve_kernel(Kernel requested) {
  if (requested == Kernel::Scalar) return Kernel::Scalar;
  if (requested == Kernel::Avx2) {
    if (!avx2_available()) throw Error(ErrorKind::Precondition, "AVX2 kernel requested but not supported by this CPU");
    return Kernel::Avx2;
  }
  const char* env = std::getenv("HYPCLASS_KERNEL");
  if (env && std::strcmp(env, "scalar") == 0) return Kernel::Scalar;
  return avx2_available() ? Kernel::Avx2 : Kernel::Scalar;
}

const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Auto: return "auto";
    case Kernel::Scalar: return "scalar";
    case Kernel::Avx2: return "avx2";
  }
  return "?";
}

Tape::Tape(std::span<const Expr> outputs, int n) : n_(n) {
  using Key = std::tuple<int, int, int, int, std::uint64_t>;
  std::map<Key, int> cse;
  std::unordered_map<const Node*, int> by_node;

  auto emit = [&](Instr ins) -> int {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &ins.c, sizeof bits);
    Key key{ins.code, ins.a, ins.b, ins.k, bits};
    auto it = cse.find(key);
    if (it != cse.end()) return it->second;
    int slot = static_cast<int>(code_.size());
    code_.push_back(ins);
    cse.emplace(key, slot);
    return slot;
  };

  std::function<int(const Expr&)> rec = [&](const Expr& e) -> int {
    auto it = by_node.find(e.id());
    if (it != by_node.end()) return it->second;
    Instr ins{Instr::Const};
    switch (e.op()) {
      case Op::Const:
        ins.code = Instr::Const;
        ins.c = e.value();
        break;
      case Op::Variable: {
        Var v = e.variable();
        if (v.index > n_) throw Error(ErrorKind::Domain, "expression uses a variable beyond dimension n");
        ins.code = Instr::Load;
        ins.a = v.kind == Var::Kind::X ? v.index : n_ + 1 + v.index;
        break;
      }
      case Op::Add:
      case Op::Mul:
      case Op::Div: {
        int a = rec(e.lhs());
        int b = rec(e.rhs());
        ins.code = e.op() == Op::Add ? Instr::Add : e.op() == Op::Mul ? Instr::Mul : Instr::Div;
        ins.a = a;
        ins.b = b;
        break;
      }
      case Op::Pow:
        ins.code = Instr::Pow;
        ins.a = rec(e.lhs());
        ins.k = e.exponent();
        break;
      case Op::Sqrt:
        ins.code = Instr::Sqrt;
        ins.a = rec(e.lhs());
        break;
      case Op::Neg:
        ins.code = Instr::Neg;
        ins.a = rec(e.lhs());
        break;
    }
    int slot = emit(ins);
    by_node.emplace(e.id(), slot);
    return slot;
  };

  for (const Expr& e : outputs) outputs_.push_back(rec(e));
}

void Tape::eval(const double* z, double* out) const {
  std::vector<double> w(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    switch (in.code) {
      case Instr::Const: w[i] = in.c; break;
      case Instr::Load: w[i] = z[in.a]; break;
      case Instr::Add: w[i] = w[in.a] + w[in.b]; break;
      case Instr::Mul: w[i] = w[in.a] * w[in.b]; break;
      case Instr::Div:
        if (w[in.b] == 0.0) throw Error(ErrorKind::Domain, "division by zero");
        w[i] = w[in.a] / w[in.b];
        break;
      case Instr::Pow: w[i] = detail::ipow(w[in.a], in.k); break;
      case Instr::Sqrt:
        if (w[in.a] < 0.0) throw Error(ErrorKind::Domain, "square root of a negative value");
        w[i] = std::sqrt(w[in.a]);
        break;
      case Instr::Neg: w[i] = -w[in.a]; break;
    }
  }
  for (std::size_t o = 0; o < outputs_.size(); ++o) out[o] = w[outputs_[o]];
}

std::vector<double> Tape::eval(const PhasePoint& rho) const {
  if (rho.n() != n_) throw Error(ErrorKind::Domain, "point dimension does not match tape");
  std::vector<double> z = rho.flat();
  std::vector<double> out(outputs_.size());
  eval(z.data(), out.data());
  return out;
}

void Tape::eval_batch(const double* z, std::size_t count, double* out, Kernel kernel) const {
  if (count == 0) return;
  if (resolve_kernel(kernel) == Kernel::Avx2) {
    detail::run_avx2(code_.data(), code_.size(), outputs_.data(), outputs_.size(), z, count, out);
  } else {
    detail::run_scalar(code_.data(), code_.size(), outputs_.data(), outputs_.size(), z, count, out);
  }
}

}  // namespace hypclass
