#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hypclass/expr.hpp"

namespace hypclass {

// Straight-line program compiled from one or more expressions. Structurally
// identical subtrees share a slot, so a tape of gradients stays small.
struct Instr {
  enum Code : unsigned char { Const, Load, Add, Mul, Div, Pow, Sqrt, Neg };
  Code code;
  int a = 0;  // operand slot, or variable index in the flat layout for Load
  int b = 0;
  int k = 0;
  double c = 0.0;
};

enum class Kernel { Auto, Scalar, Avx2 };

bool avx2_available();
// Honours HYPCLASS_KERNEL=scalar to pin the reference path.
Kernel resolve_kernel(Kernel requested);
const char* kernel_name(Kernel k);

class Tape {
 public:
  Tape() = default;
  Tape(std::span<const Expr> outputs, int n);

  int n() const { return n_; }
  std::size_t num_vars() const { return static_cast<std::size_t>(2 * (n_ + 1)); }
  std::size_t num_outputs() const { return outputs_.size(); }
  std::size_t num_slots() const { return code_.size(); }

  // Single point in the flat layout. Throws on division by zero or sqrt of a
  // negative, like eval(Expr).
  void eval(const double* z, double* out) const;
  std::vector<double> eval(const PhasePoint& rho) const;
  double eval1(const PhasePoint& rho) const { return eval(rho)[0]; }

  // Batch over `count` points. z is variable-major (z[v*count + i]) and out
  // is output-major (out[o*count + i]). No domain checks: poles yield inf/nan.
  void eval_batch(const double* z, std::size_t count, double* out,
                  Kernel kernel = Kernel::Auto) const;

 private:
  int n_ = 0;
  std::vector<Instr> code_;
  std::vector<int> outputs_;
};

namespace detail {
void run_scalar(const Instr* code, std::size_t ncode, const int* outs, std::size_t nout,
                const double* z, std::size_t count, double* out);
void run_avx2(const Instr* code, std::size_t ncode, const int* outs, std::size_t nout,
              const double* z, std::size_t count, double* out);
}  // namespace detail

}  // namespace hypclass
