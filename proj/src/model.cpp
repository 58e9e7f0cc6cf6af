#include "trapscope/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trapscope/error.hpp"

namespace trapscope {

namespace {

void require_level(int level, int levels, const char* what) {
  if (level < 1 || level > levels) {
    throw Error(ErrorKind::DomainError, std::string(what) + " level " + std::to_string(level) +
                                            " outside 1.." + std::to_string(levels));
  }
}

}  // namespace

SystemSpec build_system(int levels, double a, double b, std::vector<double> couplings, double horizon) {
  if (levels < 3) {
    throw Error(ErrorKind::BadDimension, "N must be at least 3, got " + std::to_string(levels));
  }
  if (couplings.size() != static_cast<std::size_t>(levels - 1)) {
    throw Error(ErrorKind::BadDimension, "expected " + std::to_string(levels - 1) + " couplings, got " +
                                             std::to_string(couplings.size()));
  }
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorKind::DomainError, "energies must be finite");
  }
  if (std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b))) {
    throw Error(ErrorKind::DegenerateSpectrum, "a and b must differ");
  }
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    if (!std::isfinite(couplings[k])) {
      throw Error(ErrorKind::DomainError, "coupling v_" + std::to_string(k + 1) + " is not finite");
    }
    if (couplings[k] == 0.0) {
      throw Error(ErrorKind::ZeroCoupling, "coupling v_" + std::to_string(k + 1) + " is zero");
    }
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::DomainError, "horizon T must be positive and finite");
  }
  SystemSpec sys;
  sys.levels_ = levels;
  sys.a_ = a;
  sys.b_ = b;
  sys.couplings_ = std::move(couplings);
  sys.horizon_ = horizon;
  return sys;
}

double SystemSpec::coupling(int k) const {
  if (k < 1 || k >= levels_) {
    throw Error(ErrorKind::DomainError, "coupling index " + std::to_string(k) + " out of range");
  }
  return couplings_[k - 1];
}

double SystemSpec::energy(int level) const {
  require_level(level, levels_, "energy");
  return level == 1 ? a_ : b_;
}

double SystemSpec::coupling_product() const noexcept {
  double p = 1.0;
  for (double v : couplings_) p *= v;
  return p;
}

ComplexMatrix SystemSpec::free_hamiltonian() const {
  ComplexMatrix h0 = ComplexMatrix::Zero(levels_, levels_);
  h0(0, 0) = a_;
  for (int k = 1; k < levels_; ++k) h0(k, k) = b_;
  return h0;
}

ComplexMatrix SystemSpec::interaction_hamiltonian() const {
  ComplexMatrix v = ComplexMatrix::Zero(levels_, levels_);
  for (int k = 0; k + 1 < levels_; ++k) {
    v(k, k + 1) = couplings_[k];
    v(k + 1, k) = couplings_[k];
  }
  return v;
}

SystemSpec SystemSpec::with_horizon(double horizon) const {
  return build_system(levels_, a_, b_, couplings_, horizon);
}

Observable build_observable(std::vector<double> eigenvalues, bool theorem_mode) {
  const auto n = eigenvalues.size();
  if (n < 2) {
    throw Error(ErrorKind::BadDimension, "observable needs at least two eigenvalues");
  }
  for (double x : eigenvalues) {
    if (!std::isfinite(x)) throw Error(ErrorKind::DomainError, "observable eigenvalue is not finite");
  }
  if (theorem_mode) {
    const double first = eigenvalues.front();
    const double last = eigenvalues.back();
    const double before_last = eigenvalues[n - 2];
    if (!(first > last && last > before_last)) {
      throw Error(ErrorKind::OrderingViolation, "theorem mode requires lambda_1 > lambda_N > lambda_{N-1}");
    }
  }
  Observable obs;
  obs.shift_ = eigenvalues.back();
  for (double& x : eigenvalues) x -= obs.shift_;
  eigenvalues.back() = 0.0;
  obs.eigenvalues_ = std::move(eigenvalues);
  obs.theorem_mode_ = theorem_mode;
  return obs;
}

double Observable::eigenvalue(int level) const {
  require_level(level, levels(), "observable");
  return eigenvalues_[level - 1];
}

std::vector<double> Observable::raw_eigenvalues() const {
  std::vector<double> raw(eigenvalues_);
  for (double& x : raw) x += shift_;
  return raw;
}

double Observable::min_eigenvalue() const { return *std::min_element(eigenvalues_.begin(), eigenvalues_.end()); }

double Observable::max_eigenvalue() const { return *std::max_element(eigenvalues_.begin(), eigenvalues_.end()); }

ProblemInstance make_instance(SystemSpec system, Observable observable, int initial_level) {
  if (observable.levels() != system.levels()) {
    throw Error(ErrorKind::BadDimension, "observable has " + std::to_string(observable.levels()) +
                                             " eigenvalues but the system has " +
                                             std::to_string(system.levels()) + " levels");
  }
  if (initial_level == 0) initial_level = system.levels();
  require_level(initial_level, system.levels(), "initial");
  return {std::move(system), std::move(observable), initial_level};
}

Complex interaction_element(const SystemSpec& sys, int l, int k, double t) {
  require_level(l, sys.levels(), "row");
  require_level(k, sys.levels(), "column");
  double bare = 0.0;
  if (k == l + 1) bare = sys.coupling(l);
  if (l == k + 1) bare = sys.coupling(k);
  if (bare == 0.0) return {0.0, 0.0};
  return std::polar(bare, t * (sys.energy(l) - sys.energy(k)));
}

double v_power_element(const SystemSpec& sys, int l, int n) {
  const int levels = sys.levels();
  require_level(l, levels, "row");
  if (n < 0) throw Error(ErrorKind::DomainError, "power must be non-negative");
  std::vector<double> x(levels, 0.0);
  std::vector<double> y(levels, 0.0);
  x[levels - 1] = 1.0;
  const auto v = sys.couplings();
  for (int step = 0; step < n; ++step) {
    for (int i = 0; i < levels; ++i) {
      double acc = 0.0;
      if (i > 0) acc += v[i - 1] * x[i - 1];
      if (i + 1 < levels) acc += v[i] * x[i + 1];
      y[i] = acc;
    }
    std::swap(x, y);
  }
  return x[l - 1];
}

}  // namespace trapscope
