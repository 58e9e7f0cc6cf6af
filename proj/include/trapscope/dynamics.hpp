#pragma once

#include <vector>

#include "trapscope/controls.hpp"
#include "trapscope/model.hpp"
#include "trapscope/numerics.hpp"

namespace trapscope {

/// U_T for i dU/dt = (H0 + f(t) V) U, U_0 = I, one exact exponential per
/// segment. Throws GridMismatch if f.horizon() != sys.horizon().
ComplexMatrix propagate(const SystemSpec& sys, const PiecewiseControl& f);

/// Tr(O U rho0 U^dagger) with the normalized observable (lambda_N = 0).
/// Throws NotUnitary if ||U^dagger U - I||_F > 1e-8.
double objective(const ComplexMatrix& u, const ProblemInstance& inst);

/// objective() plus the observable shift.
double raw_objective(const ComplexMatrix& u, const ProblemInstance& inst);

/// Chronological forms A^n_{lN}<f> at t = T for 0 <= n <= n_max.
class DysonForms {
 public:
  DysonForms(int levels, int n_max, std::vector<Complex> table, int substeps, double convergence_change);

  [[nodiscard]] int levels() const noexcept { return levels_; }
  [[nodiscard]] int n_max() const noexcept { return n_max_; }
  /// A^n_{lN}, 1-based level.
  [[nodiscard]] Complex at(int n, int level) const;
  /// Integrator steps per control segment used for the returned table.
  [[nodiscard]] int substeps() const noexcept { return substeps_; }
  /// Relative change seen in the last doubling test (0 when not run).
  [[nodiscard]] double convergence_change() const noexcept { return convergence_change_; }

 private:
  int levels_;
  int n_max_;
  std::vector<Complex> table_;  // (n_max + 1) x levels, row-major
  int substeps_;
  double convergence_change_;
};

struct DysonSettings {
  /// Steps per segment; 0 picks the smallest count with |omega| h <= 0.1.
  int substeps = 0;
  /// Double the step count until the table changes by less than `tolerance`
  /// (max-entry change over max-entry magnitude).
  bool check_convergence = true;
  double tolerance = 1e-9;
  int max_substeps = 1 << 14;
};

/// Smallest substep count with |omega| * T / (M * substeps) <= 0.1.
int default_substeps(const SystemSpec& sys, const PiecewiseControl& f);

/// Integrates dA^n/dt = f(t) V_t A^{n-1}(t), A^0 = I, with classical RK4.
/// Throws NonConvergence if the doubling test fails at max_substeps.
DysonForms dyson_forms(const SystemSpec& sys, const PiecewiseControl& f, int n_max,
                       const DysonSettings& settings = {});

/// Full matrices A^n(T), n = 0..n_max, at a fixed substep count.
std::vector<ComplexMatrix> dyson_matrices(const SystemSpec& sys, const PiecewiseControl& f, int n_max,
                                          int substeps);

/// <l|V^n|N> / n! * (integral f)^n. Valid for l > 1 and n <= N-1 only
/// (DomainError otherwise).
Complex closed_form_AlN(const SystemSpec& sys, const PiecewiseControl& f, int l, int n);

/// A^{N-1}_{1N} through the one-dimensional reduction
///   v_1...v_{N-1} * int_0^T e^{i omega s} f(s) F(s)^{N-2} / (N-2)! ds,
/// F(s) = int_0^s f. Exact for piecewise-constant f up to Gauss-Legendre error.
Complex kernel_form_A1N(const SystemSpec& sys, const PiecewiseControl& f);

/// A^{N-1}_{1N} by direct quadrature of the symmetric kernel over [0,T]^{N-1}.
/// Cost M^{N-1}; TooExpensive unless N <= 5 and M <= 64.
Complex kernel_bruteforce_A1N(const SystemSpec& sys, const PiecewiseControl& f);

/// ||sum_{n<=n_max} (-i)^n A^n(T) - e^{iTH0} U_T||_F.
double dyson_resum_defect(const SystemSpec& sys, const PiecewiseControl& f, int n_max, int substeps);

/// (||V||_2 * int |f|)^{n_max+1} / (n_max+1)!.
double dyson_remainder_bound(const SystemSpec& sys, const PiecewiseControl& f, int n_max);

}  // namespace trapscope
