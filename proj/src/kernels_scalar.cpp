#include <cmath>
#include <vector>

#include "hypclass/tape.hpp"
#include "ipow.hpp"

namespace hypclass::detail {

void run_scalar(const Instr* code, std::size_t ncode, const int* outs, std::size_t nout,
                const double* z, std::size_t count, double* out) {
  std::vector<double> w(ncode);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t i = 0; i < ncode; ++i) {
      const Instr& in = code[i];
      switch (in.code) {
        case Instr::Const: w[i] = in.c; break;
        case Instr::Load: w[i] = z[static_cast<std::size_t>(in.a) * count + p]; break;
        case Instr::Add: w[i] = w[in.a] + w[in.b]; break;
        case Instr::Mul: w[i] = w[in.a] * w[in.b]; break;
        case Instr::Div: w[i] = w[in.a] / w[in.b]; break;
        case Instr::Pow: w[i] = ipow(w[in.a], in.k); break;
        case Instr::Sqrt: w[i] = std::sqrt(w[in.a]); break;
        case Instr::Neg: w[i] = -w[in.a]; break;
      }
    }
    for (std::size_t o = 0; o < nout; ++o) out[o * count + p] = w[outs[o]];
  }
}

}  // namespace hypclass::detail
