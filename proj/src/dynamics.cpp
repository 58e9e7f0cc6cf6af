#include "trapscope/dynamics.hpp"

#include <cmath>
#include <string>

#include "trapscope/error.hpp"

namespace trapscope {

namespace {

constexpr double kUnitarityGate = 1e-8;
constexpr double kMaxPhaseStep = 0.1;

void require_matching_horizon(const SystemSpec& sys, const PiecewiseControl& f) {
  if (std::abs(f.horizon() - sys.horizon()) > 1e-12 * sys.horizon()) {
    throw Error(ErrorKind::GridMismatch, "control horizon " + format_real(f.horizon()) +
                                             " differs from system horizon " + format_real(sys.horizon()));
  }
}

/// Integrates the forms for the columns selected by `initial` (A^0 block).
class DysonIntegrator {
 public:
  DysonIntegrator(const SystemSpec& sys, int n_max)
      : levels_(sys.levels()), n_max_(n_max), v_(sys.interaction_hamiltonian()) {
    energies_.resize(levels_);
    for (int l = 1; l <= levels_; ++l) energies_(l - 1) = sys.energy(l);
  }

  std::vector<ComplexMatrix> run(const PiecewiseControl& f, const ComplexMatrix& initial, int substeps) const {
    const auto cols = initial.cols();
    std::vector<ComplexMatrix> state(n_max_ + 1, ComplexMatrix::Zero(levels_, cols));
    state[0] = initial;
    std::vector<ComplexMatrix> k1(state), k2(state), k3(state), k4(state), probe(state);

    const double h = f.step() / substeps;
    for (int seg = 0; seg < f.segments(); ++seg) {
      const double amp = f.value(seg);
      for (int s = 0; s < substeps; ++s) {
        const double t = f.segment_start(seg) + s * h;
        if (amp == 0.0) continue;
        const ComplexMatrix v0 = interaction_matrix(t);
        const ComplexMatrix vmid = interaction_matrix(t + 0.5 * h);
        const ComplexMatrix v1 = interaction_matrix(t + h);
        derivative(amp, v0, state, k1);
        axpy(state, 0.5 * h, k1, probe);
        derivative(amp, vmid, probe, k2);
        axpy(state, 0.5 * h, k2, probe);
        derivative(amp, vmid, probe, k3);
        axpy(state, h, k3, probe);
        derivative(amp, v1, probe, k4);
        for (int n = 1; n <= n_max_; ++n) {
          state[n] += (h / 6.0) * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
      }
    }
    return state;
  }

 private:
  ComplexMatrix interaction_matrix(double t) const {
    ComplexMatrix vt = v_;
    for (int l = 0; l < levels_; ++l) {
      for (int k = 0; k < levels_; ++k) {
        if (vt(l, k) != 0.0) vt(l, k) *= std::polar(1.0, t * (energies_(l) - energies_(k)));
      }
    }
    return vt;
  }

  void derivative(double amp, const ComplexMatrix& vt, const std::vector<ComplexMatrix>& x,
                  std::vector<ComplexMatrix>& dx) const {
    for (int n = 1; n <= n_max_; ++n) dx[n].noalias() = amp * (vt * x[n - 1]);
  }

  void axpy(const std::vector<ComplexMatrix>& x, double a, const std::vector<ComplexMatrix>& k,
            std::vector<ComplexMatrix>& out) const {
    out[0] = x[0];
    for (int n = 1; n <= n_max_; ++n) out[n] = x[n] + a * k[n];
  }

  int levels_;
  int n_max_;
  ComplexMatrix v_;
  RealVector energies_;
};

std::vector<Complex> column_table(const std::vector<ComplexMatrix>& state) {
  std::vector<Complex> table;
  table.reserve(state.size() * state.front().rows());
  for (const auto& m : state) {
    for (Eigen::Index l = 0; l < m.rows(); ++l) table.push_back(m(l, 0));
  }
  return table;
}

double relative_change(const std::vector<Complex>& fine, const std::vector<Complex>& coarse) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    diff = std::max(diff, std::abs(fine[i] - coarse[i]));
    scale = std::max(scale, std::abs(fine[i]));
  }
  if (diff == 0.0) return 0.0;
  return diff / scale;
}

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

}  // namespace

ComplexMatrix propagate(const SystemSpec& sys, const PiecewiseControl& f) {
  require_matching_horizon(sys, f);
  const ComplexMatrix h0 = sys.free_hamiltonian();
  const ComplexMatrix v = sys.interaction_hamiltonian();
  const double h = f.step();
  ComplexMatrix u = ComplexMatrix::Identity(sys.levels(), sys.levels());
  for (double amp : f.values()) {
    u = expm_mih(h0 + amp * v, h) * u;
  }
  return u;
}

double objective(const ComplexMatrix& u, const ProblemInstance& inst) {
  const int levels = inst.system.levels();
  if (u.rows() != levels || u.cols() != levels) {
    throw Error(ErrorKind::BadDimension, "propagator size does not match the instance");
  }
  const double defect = unitarity_defect(u);
  if (defect > kUnitarityGate) {
    throw Error(ErrorKind::NotUnitary, "||U^dagger U - I||_F = " + format_real(defect));
  }
  const int k = inst.initial_level - 1;
  double value = 0.0;
  for (int l = 1; l <= levels; ++l) value += inst.observable.eigenvalue(l) * std::norm(u(l - 1, k));
  return value;
}

double raw_objective(const ComplexMatrix& u, const ProblemInstance& inst) {
  return objective(u, inst) + inst.observable.shift();
}

DysonForms::DysonForms(int levels, int n_max, std::vector<Complex> table, int substeps,
                       double convergence_change)
    : levels_(levels),
      n_max_(n_max),
      table_(std::move(table)),
      substeps_(substeps),
      convergence_change_(convergence_change) {
  if (table_.size() != static_cast<std::size_t>((n_max_ + 1) * levels_)) {
    throw Error(ErrorKind::BadDimension, "Dyson table has the wrong size");
  }
  for (const auto& z : table_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorKind::NonConvergence, "Dyson table has non-finite entries");
    }
  }
}

Complex DysonForms::at(int n, int level) const {
  if (n < 0 || n > n_max_) {
    throw Error(ErrorKind::InsufficientOrder,
                "order " + std::to_string(n) + " not available (n_max = " + std::to_string(n_max_) + ")");
  }
  if (level < 1 || level > levels_) {
    throw Error(ErrorKind::DomainError, "level " + std::to_string(level) + " out of range");
  }
  return table_[static_cast<std::size_t>(n * levels_ + level - 1)];
}

int default_substeps(const SystemSpec& sys, const PiecewiseControl& f) {
  const double phase_step = std::abs(sys.omega()) * f.step();
  return std::max(1, static_cast<int>(std::ceil(phase_step / kMaxPhaseStep - 1e-12)));
}

DysonForms dyson_forms(const SystemSpec& sys, const PiecewiseControl& f, int n_max, const DysonSettings& settings) {
  require_matching_horizon(sys, f);
  if (n_max < 1) throw Error(ErrorKind::DomainError, "n_max must be at least 1");
  if (settings.substeps < 0 || settings.max_substeps < 1) {
    throw Error(ErrorKind::DomainError, "substeps must be positive");
  }
  const int levels = sys.levels();
  ComplexMatrix initial = ComplexMatrix::Zero(levels, 1);
  initial(levels - 1, 0) = 1.0;
  const DysonIntegrator integrator(sys, n_max);

  int substeps = settings.substeps > 0 ? settings.substeps : default_substeps(sys, f);
  auto table = column_table(integrator.run(f, initial, substeps));
  if (!settings.check_convergence) return {levels, n_max, std::move(table), substeps, 0.0};

  double change = 0.0;
  while (true) {
    if (2 * substeps > settings.max_substeps) {
      throw Error(ErrorKind::NonConvergence, "Dyson forms still changing by " + format_real(change) +
                                                 " at " + std::to_string(substeps) + " substeps");
    }
    substeps *= 2;
    auto finer = column_table(integrator.run(f, initial, substeps));
    change = relative_change(finer, table);
    table = std::move(finer);
    if (change < settings.tolerance) break;
  }
  return {levels, n_max, std::move(table), substeps, change};
}

std::vector<ComplexMatrix> dyson_matrices(const SystemSpec& sys, const PiecewiseControl& f, int n_max,
                                          int substeps) {
  require_matching_horizon(sys, f);
  if (n_max < 0 || substeps < 1) throw Error(ErrorKind::DomainError, "need n_max >= 0 and substeps >= 1");
  const DysonIntegrator integrator(sys, n_max);
  return integrator.run(f, ComplexMatrix::Identity(sys.levels(), sys.levels()), substeps);
}

Complex closed_form_AlN(const SystemSpec& sys, const PiecewiseControl& f, int l, int n) {
  if (l <= 1 || l > sys.levels() || n < 0 || n > sys.levels() - 1) {
    throw Error(ErrorKind::DomainError, "closed form needs 1 < l <= N and 0 <= n <= N-1");
  }
  return v_power_element(sys, l, n) / factorial(n) * std::pow(integral(f), n);
}

Complex kernel_form_A1N(const SystemSpec& sys, const PiecewiseControl& f) {
  require_matching_horizon(sys, f);
  const int m = sys.levels() - 1;
  const double omega = sys.omega();
  const double h = f.step();
  // Split each segment so that |omega| * piece <= 0.5; 16 nodes are then exact
  // to rounding for the polynomial-times-oscillation integrand.
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(omega) * h / 0.5)));
  const double piece = h / pieces;
  const auto rule = gauss_legendre(16);
  const double inv_fact = 1.0 / factorial(m - 1);

  Complex acc{0.0, 0.0};
  double prefix = 0.0;  // F at the start of the current segment
  for (int j = 0; j < f.segments(); ++j) {
    const double fj = f.value(j);
    if (fj != 0.0) {
      const double start = f.segment_start(j);
      Complex seg{0.0, 0.0};
      for (int p = 0; p < pieces; ++p) {
        const double lo = p * piece;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double u = lo + 0.5 * piece * (rule.nodes[q] + 1.0);
          const double big_f = prefix + fj * u;
          seg += 0.5 * piece * rule.weights[q] * std::pow(big_f, m - 1) * std::polar(1.0, omega * (start + u));
        }
      }
      acc += fj * seg;
    }
    prefix += fj * h;
  }
  return sys.coupling_product() * inv_fact * acc;
}

Complex kernel_bruteforce_A1N(const SystemSpec& sys, const PiecewiseControl& f) {
  require_matching_horizon(sys, f);
  const int m = sys.levels() - 1;
  const int segs = f.segments();
  if (sys.levels() > 5 || segs > 64) {
    throw Error(ErrorKind::TooExpensive, "brute-force kernel quadrature needs N <= 5 and M <= 64");
  }
  const double omega = sys.omega();
  const double h = f.step();

  // Over a product cell where k of the coordinates share the top segment c,
  // e^{i omega max} depends only on the max of those k coordinates, whose
  // density on [0,h] is k u^{k-1} / h^k. Hence the cell integral is
  //   h^{m-k} e^{i omega s_c} * k int_0^h e^{i omega u} u^{k-1} du.
  const auto rule = gauss_legendre(24);
  std::vector<Complex> tie_integral(m + 1, Complex{});
  for (int k = 1; k <= m; ++k) {
    Complex acc{};
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = 0.5 * h * (rule.nodes[q] + 1.0);
      acc += 0.5 * h * rule.weights[q] * k * std::pow(u, k - 1) * std::polar(1.0, omega * u);
    }
    tie_integral[k] = acc * std::pow(h, m - k);
  }
  std::vector<Complex> top_phase(segs);
  for (int c = 0; c < segs; ++c) top_phase[c] = std::polar(1.0, omega * f.segment_start(c));

  std::vector<int> idx(m, 0);
  Complex acc{};
  while (true) {
    double weight = 1.0;
    int top = -1;
    int ties = 0;
    for (int i = 0; i < m; ++i) {
      weight *= f.value(idx[i]);
      if (idx[i] > top) {
        top = idx[i];
        ties = 1;
      } else if (idx[i] == top) {
        ++ties;
      }
    }
    if (weight != 0.0) acc += weight * top_phase[top] * tie_integral[ties];
    int d = 0;
    while (d < m && ++idx[d] == segs) idx[d++] = 0;
    if (d == m) break;
  }
  return sys.coupling_product() / factorial(m) * acc;
}

double dyson_resum_defect(const SystemSpec& sys, const PiecewiseControl& f, int n_max, int substeps) {
  if (substeps < 1) substeps = default_substeps(sys, f);
  const auto forms = dyson_matrices(sys, f, n_max, substeps);
  const int levels = sys.levels();
  ComplexMatrix series = ComplexMatrix::Zero(levels, levels);
  Complex coeff{1.0, 0.0};
  for (int n = 0; n <= n_max; ++n) {
    series += coeff * forms[n];
    coeff *= Complex{0.0, -1.0};
  }
  const ComplexMatrix interaction_frame = expm_mih(sys.free_hamiltonian(), -sys.horizon()) * propagate(sys, f);
  return (series - interaction_frame).norm();
}

double dyson_remainder_bound(const SystemSpec& sys, const PiecewiseControl& f, int n_max) {
  double l1 = 0.0;
  for (double x : f.values()) l1 += std::abs(x);
  l1 *= f.step();
  const double x = hermitian_spectral_norm(sys.interaction_hamiltonian()) * l1;
  return std::pow(x, n_max + 1) / factorial(n_max + 1);
}

}  // namespace trapscope
