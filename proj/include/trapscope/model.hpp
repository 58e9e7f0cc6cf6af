#pragma once

#include <span>
#include <vector>

#include "trapscope/numerics.hpp"

namespace trapscope {

/// The controlled pair (H0, V) of the degenerate chain family:
///   H0 = a|1><1| + b * sum_{k>=2} |k><k|,
///   V  = sum_k v_k (|k><k+1| + |k+1><k|),  v_k real and nonzero.
/// Levels are numbered 1..N in every public accessor.
class SystemSpec {
 public:
  [[nodiscard]] int levels() const noexcept { return levels_; }
  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }
  /// The only frequency seen in the interaction picture.
  [[nodiscard]] double omega() const noexcept { return a_ - b_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::span<const double> couplings() const noexcept { return couplings_; }
  /// v_k for 1 <= k <= N-1.
  [[nodiscard]] double coupling(int k) const;
  /// E_1 = a, E_l = b otherwise.
  [[nodiscard]] double energy(int level) const;
  [[nodiscard]] double coupling_product() const noexcept;

  [[nodiscard]] ComplexMatrix free_hamiltonian() const;
  [[nodiscard]] ComplexMatrix interaction_hamiltonian() const;

  /// Same system with another target time.
  [[nodiscard]] SystemSpec with_horizon(double horizon) const;

 private:
  friend SystemSpec build_system(int, double, double, std::vector<double>, double);
  SystemSpec() = default;

  int levels_ = 0;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> couplings_;
  double horizon_ = 0.0;
};

/// Throws BadDimension, DegenerateSpectrum or ZeroCoupling.
SystemSpec build_system(int levels, double a, double b, std::vector<double> couplings, double horizon);

/// Diagonal target operator O = sum lambda_k |k><k|, stored shifted so that
/// lambda_N = 0. The shift is kept so raw objective values can be recovered.
class Observable {
 public:
  [[nodiscard]] int levels() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  /// Normalized eigenvalue, 1-based.
  [[nodiscard]] double eigenvalue(int level) const;
  [[nodiscard]] double raw_eigenvalue(int level) const { return eigenvalue(level) + shift_; }
  [[nodiscard]] std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  [[nodiscard]] std::vector<double> raw_eigenvalues() const;
  /// Amount subtracted from the raw eigenvalues (the raw lambda_N).
  [[nodiscard]] double shift() const noexcept { return shift_; }
  [[nodiscard]] bool theorem_mode() const noexcept { return theorem_mode_; }
  [[nodiscard]] double min_eigenvalue() const;
  [[nodiscard]] double max_eigenvalue() const;

 private:
  friend Observable build_observable(std::vector<double>, bool);
  Observable() = default;

  std::vector<double> eigenvalues_;
  double shift_ = 0.0;
  bool theorem_mode_ = false;
};

/// Throws BadDimension (fewer than two levels) or, in theorem mode,
/// OrderingViolation unless lambda_1 > lambda_N > lambda_{N-1}.
Observable build_observable(std::vector<double> eigenvalues, bool theorem_mode);

struct ProblemInstance {
  SystemSpec system;
  Observable observable;
  int initial_level;  // rho0 = |initial_level><initial_level|
};

/// Checks that the level counts agree and 1 <= initial_level <= N.
/// initial_level = 0 selects N.
ProblemInstance make_instance(SystemSpec system, Observable observable, int initial_level = 0);

/// <l| e^{itH0} V e^{-itH0} |k>, 1-based levels.
Complex interaction_element(const SystemSpec& sys, int l, int k, double t);

/// <l| V^n |N> by repeated tridiagonal products.
double v_power_element(const SystemSpec& sys, int l, int n);

}  // namespace trapscope
