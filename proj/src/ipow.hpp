#pragma once

namespace hypclass::detail {

// Binary exponentiation with a fixed multiplication order. Every evaluation
// path uses this order so scalar, tape and vector results agree bitwise.
inline double ipow(double base, int k) {
  double result = 1.0;
  double b = base;
  bool first = true;
  while (k > 0) {
    if (k & 1) {
      result = first ? b : result * b;
      first = false;
    }
    k >>= 1;
    if (k > 0) b = b * b;
  }
  return result;
}

}  // namespace hypclass::detail
