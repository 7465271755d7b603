#include <algorithm>
#include <cstdint>
#include <vector>

#include "hypclass/tape.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define HYPCLASS_HAVE_X86 1
#endif

namespace hypclass::detail {

#ifdef HYPCLASS_HAVE_X86

namespace {

__attribute__((target("avx2"))) inline __m256d ipow4(__m256d base, int k) {
  __m256d result = _mm256_set1_pd(1.0);
  __m256d b = base;
  bool first = true;
  while (k > 0) {
    if (k & 1) {
      result = first ? b : _mm256_mul_pd(result, b);
      first = false;
    }
    k >>= 1;
    if (k > 0) b = _mm256_mul_pd(b, b);
  }
  return result;
}

__attribute__((target("avx2"))) void run_block(const Instr* code, std::size_t ncode, const int* outs,
                                                 std::size_t nout, const double* z, std::size_t count,
                                                 std::size_t p, double* out, __m256d* w) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (std::size_t i = 0; i < ncode; ++i) {
    const Instr& in = code[i];
    switch (in.code) {
      case Instr::Const: w[i] = _mm256_set1_pd(in.c); break;
      case Instr::Load: w[i] = _mm256_loadu_pd(z + static_cast<std::size_t>(in.a) * count + p); break;
      case Instr::Add: w[i] = _mm256_add_pd(w[in.a], w[in.b]); break;
      case Instr::Mul: w[i] = _mm256_mul_pd(w[in.a], w[in.b]); break;
      case Instr::Div: w[i] = _mm256_div_pd(w[in.a], w[in.b]); break;
      case Instr::Pow: w[i] = ipow4(w[in.a], in.k); break;
      case Instr::Sqrt: w[i] = _mm256_sqrt_pd(w[in.a]); break;
      case Instr::Neg: w[i] = _mm256_xor_pd(w[in.a], sign); break;
    }
  }
  for (std::size_t o = 0; o < nout; ++o) _mm256_storeu_pd(out + o * count + p, w[outs[o]]);
}

}  // namespace

void run_avx2(const Instr* code, std::size_t ncode, const int* outs, std::size_t nout,
              const double* z, std::size_t count, double* out) {
  std::size_t blocks = count / 4;
  if (blocks > 0) {
    std::vector<double> storage(4 * ncode + 4);
    auto addr = reinterpret_cast<std::uintptr_t>(storage.data());
    auto* w = reinterpret_cast<__m256d*>((addr + 31) & ~std::uintptr_t{31});
    for (std::size_t blk = 0; blk < blocks; ++blk)
      run_block(code, ncode, outs, nout, z, count, blk * 4, out, w);
  }
  std::size_t done = blocks * 4;
  if (done < count) {
    // Tail points go through the reference kernel on a compacted copy.
    std::size_t rest = count - done;
    std::size_t nvars = 0;
    for (std::size_t i = 0; i < ncode; ++i)
      if (code[i].code == Instr::Load) nvars = std::max(nvars, static_cast<std::size_t>(code[i].a) + 1);
    std::vector<double> zt(nvars * rest);
    for (std::size_t v = 0; v < nvars; ++v)
      for (std::size_t j = 0; j < rest; ++j) zt[v * rest + j] = z[v * count + done + j];
    std::vector<double> ot(nout * rest);
    run_scalar(code, ncode, outs, nout, zt.data(), rest, ot.data());
    for (std::size_t o = 0; o < nout; ++o)
      for (std::size_t j = 0; j < rest; ++j) out[o * count + done + j] = ot[o * rest + j];
  }
}

#else

void run_avx2(const Instr* code, std::size_t ncode, const int* outs, std::size_t nout,
              const double* z, std::size_t count, double* out) {
  run_scalar(code, ncode, outs, nout, z, count, out);
}

#endif

}  // namespace hypclass::detail
