#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trapscope/controls.hpp"
#include "trapscope/dynamics.hpp"
#include "trapscope/model.hpp"

namespace trapscope {

/// (1/n!) J^(n)(0)(f, ..., f) assembled from the chronological forms:
///   sum_{j=0}^{n} sum_{l=1}^{N-1} (-1)^{n-j} i^n lambda_l A^j_{lN} conj(A^{n-j}_{lN}).
/// Needs forms.n_max() >= n (InsufficientOrder) and initial level N.
/// Throws NonRealResult if the imaginary residue exceeds 1e-10 of the sum's
/// magnitude.
double differential(const ProblemInstance& inst, const DysonForms& forms, int n);

/// lambda_1 |A^{N-1}_{1N}|^2, the order-(2N-2) coefficient on mean-zero f.
double order_2N2_value(const ProblemInstance& inst, const DysonForms& forms);

struct TaylorFit {
  PiecewiseControl direction;
  int max_order = 0;
  /// coefficients[k-1] multiplies t^k.
  std::vector<double> coefficients;
  /// Largest |g(t) - model(t)| over the samples at the accepted radius.
  double residual = 0.0;
  /// Radius of the accepted sample grid.
  double radius = 0.0;
  int shrinks = 0;
  /// True if the residual test passed before the shrink limit.
  bool accepted = false;
  /// 2-norm condition number of the design matrix in the scaled variable t/radius.
  double condition = 0.0;

  [[nodiscard]] double coefficient(int k) const { return coefficients.at(k - 1); }
};

/// Least-squares fit of g(t) = J(t f) - J(0) by sum_{k=1}^{max_order} c_k t^k
/// on t in +-radius {1/points, ..., 1}. The radius is halved (at most 6 times)
/// until residual <= 1e-3 |c_max_order| radius^max_order. Throws
/// IllConditioned when the design condition number exceeds 1e12.
TaylorFit taylor_fit(const ProblemInstance& inst, const PiecewiseControl& f, int max_order, double radius,
                     int points);

struct LieAlgebraResult {
  int dimension = 0;
  bool saturated = false;
  int depth_reached = 0;
  double tolerance = 0.0;
};

/// Real dimension of the Lie algebra generated by {i H0, i V}, built
/// breadth-first from nested commutators with Gram-Schmidt pruning. Saturated
/// means dimension >= N^2 - 1.
LieAlgebraResult lie_rank(const ComplexMatrix& h0, const ComplexMatrix& v, double tol, int max_depth);
LieAlgebraResult lie_rank(const SystemSpec& sys, double tol, int max_depth);

struct WitnessResult {
  PiecewiseControl control;
  double value;      // normalized J
  double raw_value;  // J with the observable shift restored
  double threshold;  // J(0) + 0.01 (lambda_1 - lambda_N)
  bool success;
  int evaluations;
};

/// Random search over `budget` seeded controls followed by greedy
/// coordinate refinement of the best one: 5 rounds, first improvement in
/// index order, step halved after a round without improvement.
WitnessResult witness_search(const ProblemInstance& inst, std::uint64_t seed, int budget,
                             std::pair<double, double> amplitude_range, int segments);

struct CertificateTolerances {
  double stationarity_analytic = 1e-10;
  double stationarity_fit = 1e-8;
  double descent_relative = 1e-3;
  double identity_relative = 1e-9;   // Eq.-level identities between analytic paths
  double flatness_analytic = 1e-9;   // scaled by (1 + ||f||)^n
  double fit_absolute = 1e-6;        // fit vs analytic: max(abs, rel |c|)
  double fit_relative = 1e-3;
  double nonneg_floor = -1e-8;
  double dyson_convergence = 1e-9;
  double lie = 1e-9;
};

struct CertificateConfig {
  int segments = 64;
  int substeps = 0;
  int directions = 8;
  std::uint64_t seed = 1;
  double amplitude = 1.0;
  /// Fit degree is 2N - 2 + fit_extra_orders.
  int fit_extra_orders = 8;
  double fit_radius = 0.5;
  int witness_budget = 500;
  /// Empty means {T, 2T}.
  std::vector<double> witness_horizons;
  std::pair<double, double> witness_amplitudes{0.5, 3.0};
  int lie_max_depth = 12;
  /// Worker threads for the direction loop; 0 = hardware concurrency.
  int threads = 0;
  CertificateTolerances tolerances;
};

struct Criterion {
  std::string quantity;
  double measured;
  std::string relation;  // "<=", "<", ">=" or ">"
  double threshold;
  bool passed;
};

struct Check {
  std::string name;
  bool passed = true;
  bool required = true;
  std::vector<Criterion> criteria;
};

struct DirectionRecord {
  std::uint64_t seed;
  bool mean_zero;
  double integral;
  double norm;
  int substeps;
  double dyson_change;
  std::vector<double> differentials;  // orders 1..2N-2
  std::optional<double> order_2N2;    // mean-zero directions only
  TaylorFit fit;
  double remainder_max;        // max of sum_{k=2}^{2N-3} c_k t^k over |t| <= remainder_epsilon
  double remainder_tolerance;  // fit_absolute * sum_{k=2}^{2N-3} eps^k
  double remainder_epsilon;    // fit radius, halved until the bound holds (at most 10 times)
};

struct WitnessRecord {
  double horizon;
  double value;
  double raw_value;
  double threshold;
  bool success;
  int evaluations;
};

struct StageFailure {
  std::string stage;
  std::string message;
};

struct TrapReport {
  int levels;
  double a;
  double b;
  double horizon;
  std::vector<double> couplings;
  std::vector<double> raw_eigenvalues;
  std::vector<double> eigenvalues;
  double shift;
  int claimed_order;
  CertificateConfig config;
  std::vector<Check> checks;
  std::vector<DirectionRecord> directions;
  std::optional<LieAlgebraResult> lie;
  std::vector<WitnessRecord> witness;
  bool witness_found = false;
  std::optional<StageFailure> failure;
  bool passed = false;
};

/// Direction i uses seed + i; even i are mean-zero random directions, odd i
/// are mean-zero directions shifted by amplitude / 2.
PiecewiseControl certificate_direction(const CertificateConfig& config, double horizon, int index);

/// Runs every trap check for `inst`. Precondition failures
/// (no theorem-mode observable, initial level != N) throw; numerical failures
/// inside a stage are recorded in report.failure and fail the report.
TrapReport trap_certificate(const ProblemInstance& inst, const CertificateConfig& config);

}  // namespace trapscope
