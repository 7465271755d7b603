#pragma once

#include <complex>
#include <string>
#include <vector>

#include "hypclass/linalg.hpp"
#include "hypclass/system.hpp"

namespace hypclass {

using Spectrum = std::vector<std::complex<double>>;

// F = J (1/2 Hess p) with J = [[0, I], [-I, 0]] in the (x, xi) layout.
Matrix fundamental_matrix(const SymbolSystem& sys, const PhasePoint& rho, double sigma_tol = kSigmaTol);
Spectrum spectrum(const Matrix& f);

struct WDim {
  int dim = 0;
  bool ambiguous = false;
};
// dim(Ker F^2 cap Im F^2) = dim Ker + dim Im - rank [Ker | Im]. The joint
// rank counts principal angles above angle_tol; the default matches the
// |alpha| = 1 band of 1e-7.
inline constexpr double kWAngleTol = 1e-7 / 1.4142135623730951;
WDim w_dim(const Matrix& f, double angle_tol = kWAngleTol);

// Brackets of the sum-of-squares frame phi^_1 = sqrt(1+theta) phi_1, phi^_j = phi_j.
Matrix sos_bracket_matrix(const SymbolSystem& sys, const PhasePoint& rho);

// Splits phi' = (phi_1..phi_d) into r complement directions followed by the
// kernel directions {v' : (0, v') in Ker A}. P' rows are the new directions.
struct KernelSplit {
  int r = 0;
  bool rank_ambiguous = false;
  bool has_kernel = false;       // Ker A != {0}
  double first_entry_norm = 0.0; // |projection of e_0 onto Ker A|
  Matrix P_prime;                // d x d orthogonal
};
KernelSplit kernel_split(const Matrix& sos_brackets);

struct BracketTable {
  Matrix A_raw;  // {phi_i, phi_j}, 0 <= i, j <= d, given frame
  Matrix A;      // same in the sum-of-squares frame
  int r = 0;
  bool rank_ambiguous = false;
  Matrix P;      // (d+1)x(d+1), 1 (+) P'; rows give the rotated phi~ in terms of phi^
  Matrix A_rot;  // P A P^T
  std::vector<double> a;      // {xi_0, phi~_i}, i = 1..r
  Matrix M;                   // M_ij = {phi~_j, phi~_i}, i, j = 1..r
  std::vector<double> alpha;  // M alpha = a
  double alpha_norm = 0.0;
  double alpha_norm_kernel = 0.0;  // same quantity from the kernel projection of e_0
  double m_residual = 0.0;         // |M alpha - a| / max(1, |a|)
  double delta = 0.0;              // {phi_1, phi_2} in the given frame
  double theta = 0.0;
};

BracketTable bracket_table(const SymbolSystem& sys, const PhasePoint& rho, double sigma_tol = kSigmaTol);

// (1 - |alpha|^2) / |alpha|^2 with |alpha| = 1 snapped to theta = 0.
inline constexpr double kAlphaUnitTol = 1e-8;
double theta_from_alpha(double alpha_norm);
double theta_at(const SymbolSystem& sys, const PhasePoint& rho);

enum class Label { Effective, Type1, Type2 };
const char* to_string(Label l);

struct ClassifyOptions {
  double theta_band = 1e-7;
  // Spectrum cross-check runs only when |theta| exceeds this: near a
  // transition the perturbed 4-block gives eigenvalue errors ~ eps^(1/4).
  double crosscheck_band = 1e-4;
  double real_part_tol = 1e-3;  // relative to max(1, |F|)
};

struct SpectralReport {
  Spectrum eigenvalues;
  int dimW = 0;
  bool dimW_ambiguous = false;
  double theta = 0.0;
  double alpha_norm = 0.0;
  int rank = 0;
  double trace_plus = 0.0;
  Label label = Label::Type2;
  bool spectrum_checked = false;
  bool has_real_pair = false;
};

SpectralReport classify(const SymbolSystem& sys, const PhasePoint& rho, const ClassifyOptions& opt = {});

double trace_plus(const Spectrum& s, double scale = 1.0);
double product_identity_check(const SymbolSystem& sys, const PhasePoint& rho);
double reduced_bracket_check(const SymbolSystem& sys, const PhasePoint& rho);

// Eigenvalues with |lambda| > rel * max(1, max|lambda|).
Spectrum nonzero_part(const Spectrum& s, double rel = 1e-5);
// The k eigenvalues of largest modulus.
Spectrum largest(const Spectrum& s, std::size_t k);

}  // namespace hypclass
