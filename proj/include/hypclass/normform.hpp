#pragma once

#include <optional>
#include <vector>

#include "hypclass/linalg.hpp"
#include "hypclass/system.hpp"

namespace hypclass {

struct NormalFormOptions {
  double tol = 1e-8;    // scaled by max(1, local gradient size)
  double floor = 1e-8;  // nondegeneracy floor for c3 and c5
};

struct NormalFormCertificate {
  int r = 0;
  double c1 = 0.0;  // max |{phi_i, phi_j}|, j >= r+1
  double c2 = 0.0;  // max |{xi_0 - phi_1, phi_j}|
  double c3 = 0.0;  // |{phi_1, phi_2}(base)|
  double c4 = 0.0;  // max |{phi_2, phi_j}|, 3 <= j <= r
  double c5 = 1.0;  // |det({phi_i, phi_j})_{3..r}(base)|
  double tol = 0.0;
  double floor = 0.0;
  std::size_t samples = 0;
  bool verdict = false;
};

// Samples are projected onto Sigma' (xi_0 free) before evaluation.
NormalFormCertificate verify_normal_form(const SymbolSystem& sys, const std::vector<PhasePoint>& samples,
                                         const NormalFormOptions& opt = {});

struct Kakikae {
  Expr scale;      // 1 + nu
  Expr theta_hat;  // (theta - nu^2 - 2 nu) / (1 + nu)^2
};
Kakikae kakikae_rewrite(const Expr& theta, const Expr& nu);
// Also rejects 1 + nu vanishing at any of the given points.
Kakikae kakikae_rewrite(const Expr& theta, const Expr& nu, const std::vector<PhasePoint>& region);

double theta_hat_map(double theta);
double theta_from_hat(double theta_hat);

struct PointwiseFrame {
  Matrix A;        // sum-of-squares frame brackets at the point
  Matrix P;        // 1 (+) P', kernel split
  Matrix T;        // 1 (+) T (+) I, alpha alignment
  Matrix Q;        // 1 (+) 1 (+) Q (+) I, kernel of the phi_2..phi_r block
  Matrix C;        // rows: new phi_j as combinations of the sum-of-squares phi^
  Matrix B;        // C A C^T
  std::vector<double> alpha;
  double alpha_norm = 0.0;
  double theta = 0.0;
  int r = 0;
  double congruence_residual = 0.0;  // |C^T D C - I| on the phi' block
  double xi0_residual = 0.0;         // max_j |{xi_0 - phi_1, phi_j}|
  double phi2_residual = 0.0;        // max_{3<=j<=r} |{phi_2, phi_j}|
  double delta = 0.0;                // {phi_1, phi_2} after the reduction
  double det_tail = 1.0;             // det({phi_i, phi_j})_{3..r}
};

PointwiseFrame pointwise_normal_form(const Matrix& sos_brackets);
PointwiseFrame pointwise_normal_form(const SymbolSystem& sys, const PhasePoint& rho);

struct ExtensionReport {
  double fit1_residual = 0.0;   // {phi_1, theta~} - (c1 phi_1 + c2 phi_2), sup
  double fit2_residual = 0.0;   // {phi_2, theta~} - c3 phi_2, sup
  double sigma_residual = 0.0;  // max_{3<=j<=r} |{phi_j, theta~}| on Sigma'
  double agreement = 0.0;       // max |theta~ - theta| on Sigma'
  double theta_inf = 0.0, theta_sup = 0.0;
  double ext_inf = 0.0, ext_sup = 0.0;
  bool range_ok = false;
  double tol = 0.0;
  bool pass = false;
};

ExtensionReport extension_check(const SymbolSystem& sys, const Expr& theta_tilde,
                                const std::vector<PhasePoint>& samples, double tol = 1e-8);

}  // namespace hypclass
