#include "trapscope/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "trapscope/error.hpp"

namespace trapscope {
namespace {

using testing::kPi;

/// exp(-i h H) by scaling and squaring of a truncated Taylor series; shares
/// no code with the eigendecomposition path.
ComplexMatrix taylor_expm_mih(const ComplexMatrix& h, double s) {
  const ComplexMatrix x = Complex(0.0, -s) * h;
  int squarings = 0;
  double scale = x.norm();
  while (scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const ComplexMatrix y = x / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * y / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

TEST(Propagate, FreeEvolution) {
  const auto sys = build_system(4, 1.3, -0.2, {1.0, 2.0, 0.5}, 2.7);
  const auto u = propagate(sys, PiecewiseControl::zero(2.7, 16));
  for (int l = 1; l <= 4; ++l) {
    EXPECT_LE(std::abs(u(l - 1, l - 1) - std::polar(1.0, -sys.energy(l) * 2.7)), 1e-12);
  }
  EXPECT_LE((u - u.diagonal().asDiagonal().toDenseMatrix()).norm(), 1e-14);
}

TEST(Propagate, ShortHorizonIsNearIdentity) {
  const double horizon = 1e-6;
  const auto sys = build_system(3, 1.0, 0.0, {1.0, 1.0}, horizon);
  const auto u = propagate(sys, PiecewiseControl::constant(horizon, 1, 2.0));
  EXPECT_LE((u - ComplexMatrix::Identity(3, 3)).norm(), 10.0 * horizon);
}

TEST(Propagate, GroundOfInitialLevelIsStationary) {
  const auto sys = build_system(3, 1.0, 0.0, {1.0, 1.0}, kPi);
  const auto u = propagate(sys, PiecewiseControl::zero(kPi, 8));
  EXPECT_NEAR(std::abs(u(2, 2)), 1.0, 1e-14);
}

TEST(Propagate, MatchesTaylorExponentialProduct) {
  const auto sys = build_system(4, 0.8, -0.5, {1.1, -0.7, 1.4}, 3.0);
  const auto f = random_direction(17, 12, 3.0, false, 1.5);
  ComplexMatrix oracle = ComplexMatrix::Identity(4, 4);
  for (double amp : f.values()) {
    oracle = taylor_expm_mih(sys.free_hamiltonian() + amp * sys.interaction_hamiltonian(), f.step()) * oracle;
  }
  EXPECT_LE((propagate(sys, f) - oracle).norm(), 1e-12);
}

TEST(Propagate, UnitarityAcrossRandomControls) {
  for (int n = 3; n <= 6; ++n) {
    const auto sys = build_system(n, 1.0, 0.0, std::vector<double>(n - 1, 1.0), 2 * kPi);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto f = random_direction(seed, 64, 2 * kPi, false, 3.0);
      EXPECT_LE(unitarity_defect(propagate(sys, f)), 1e-10 * n * 64);
    }
  }
}

TEST(Propagate, GridMismatch) {
  const auto sys = build_system(3, 1.0, 0.0, {1.0, 1.0}, 1.0);
  try {
    propagate(sys, PiecewiseControl::zero(2.0, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridMismatch);
  }
}

TEST(Objective, Examples) {
  const auto inst = testing::reference_n3();
  EXPECT_EQ(objective(ComplexMatrix::Identity(3, 3), inst), 0.0);
  EXPECT_NEAR(objective(propagate(inst.system, PiecewiseControl::zero(2 * kPi, 64)), inst), 0.0, 1e-15);
  // Raw value restores the shift.
  const auto shifted = make_instance(inst.system, build_observable({3.0, 1.0, 2.0}, true));
  EXPECT_EQ(raw_objective(ComplexMatrix::Identity(3, 3), shifted), 2.0);
}

TEST(Objective, RejectsNonUnitary) {
  const auto inst = testing::reference_n3();
  try {
    objective(2.0 * ComplexMatrix::Identity(3, 3), inst);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUnitary);
  }
}

TEST(Objective, KinematicBoundsProperty) {
  const auto inst = testing::reference_n3();
  const double lo = inst.observable.min_eigenvalue();
  const double hi = inst.observable.max_eigenvalue();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto f = random_direction(seed, 16, 2 * kPi, false, 0.5 + (seed % 7));
    const double j = objective(propagate(inst.system, f), inst);
    EXPECT_GE(j, lo - 1e-12);
    EXPECT_LE(j, hi + 1e-12);
  }
}

TEST(DysonForms, ZeroControl) {
  const auto inst = testing::reference_n3();
  const auto forms = dyson_forms(inst.system, PiecewiseControl::zero(2 * kPi, 32), 4);
  for (int l = 1; l <= 3; ++l) {
    EXPECT_EQ(forms.at(0, l), Complex(l == 3 ? 1.0 : 0.0, 0.0));
    for (int n = 1; n <= 4; ++n) EXPECT_EQ(forms.at(n, l), Complex(0.0, 0.0));
  }
}

TEST(DysonForms, FirstOrderIsCouplingTimesIntegral) {
  const auto sys = build_system(5, 1.0, 0.0, {1.0, 2.0, 3.0, -1.5}, 4.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = random_direction(seed, 32, 4.0, false, 1.0);
    const auto forms = dyson_forms(sys, f, 2);
    EXPECT_LE(std::abs(forms.at(1, 4) - Complex(-1.5 * integral(f), 0.0)), 1e-12);
  }
}

TEST(DysonForms, CosineAtOmegaTwo) {
  // Continuum value: int_0^{2pi} e^{2is} (1/2) sin 2s ds = i pi / 2. The
  // midpoint discretization converges at second order in T/M.
  const Complex exact(0.0, kPi / 2);
  const auto inst = testing::reference_n3(2.0, 0.0);
  const auto coarse = dyson_forms(inst.system, testing::cosine_control(2 * kPi, 64), 2);
  const auto fine = dyson_forms(inst.system, testing::cosine_control(2 * kPi, 256), 2);
  EXPECT_LE(std::abs(coarse.at(2, 1) - exact), 2e-3);
  EXPECT_LE(std::abs(fine.at(2, 1) - exact), 1e-4);
  EXPECT_LE(std::abs(coarse.at(2, 1) - kernel_form_A1N(inst.system, testing::cosine_control(2 * kPi, 64))), 1e-8);
  // omega = 1: frequency orthogonality makes the continuum value vanish.
  const auto sys1 = build_system(3, 1.0, 0.0, {1.0, 1.0}, 2 * kPi);
  EXPECT_LE(std::abs(dyson_forms(sys1, testing::cosine_control(2 * kPi, 256), 2).at(2, 1)), 1e-4);
}

TEST(DysonForms, CornerVanishesBelowChainLength) {
  for (int n_levels = 3; n_levels <= 6; ++n_levels) {
    const auto sys = build_system(n_levels, 1.0, 0.0, std::vector<double>(n_levels - 1, 1.0), 2 * kPi);
    const auto f = random_direction(3, 32, 2 * kPi, false, 1.0);
    const auto forms = dyson_forms(sys, f, n_levels - 1);
    for (int n = 0; n < n_levels - 1; ++n) EXPECT_LE(std::abs(forms.at(n, 1)), 1e-10);
    EXPECT_GT(std::abs(forms.at(n_levels - 1, 1)), 1e-6);
  }
}

TEST(DysonForms, MatchesClosedFormAwayFromFirstLevel) {
  for (int n_levels = 3; n_levels <= 6; ++n_levels) {
    std::vector<double> v;
    for (int k = 1; k < n_levels; ++k) v.push_back(0.5 + 0.3 * k);
    const auto sys = build_system(n_levels, 1.5, -0.5, v, 3.0);
    const auto f = random_direction(11, 24, 3.0, false, 1.0).shifted(0.4);
    const auto forms = dyson_forms(sys, f, n_levels - 1);
    for (int l = 2; l <= n_levels; ++l) {
      for (int n = 0; n <= n_levels - 1; ++n) {
        const Complex closed = closed_form_AlN(sys, f, l, n);
        EXPECT_LE(std::abs(forms.at(n, l) - closed), 1e-9 * std::max(1.0, std::abs(closed)))
            << "N=" << n_levels << " l=" << l << " n=" << n;
      }
    }
  }
}

TEST(DysonForms, Homogeneity) {
  // Degree-n homogeneity holds stage by stage in RK4, so it is exact up to
  // rounding at a fixed step count.
  const auto inst = testing::reference_n4();
  const auto f = random_direction(21, 32, 2 * kPi, false, 1.0);
  DysonSettings fixed;
  fixed.substeps = 16;
  fixed.check_convergence = false;
  const auto base = dyson_forms(inst.system, f, 6, fixed);
  for (double t : {-1.0, 0.5, 2.0}) {
    const auto scaled = dyson_forms(inst.system, f.scaled(t), 6, fixed);
    for (int n = 0; n <= 6; ++n) {
      double scale = 0.0;
      for (int l = 1; l <= 4; ++l) scale = std::max(scale, std::abs(std::pow(t, n) * base.at(n, l)));
      for (int l = 1; l <= 4; ++l) {
        const Complex expected = std::pow(t, n) * base.at(n, l);
        EXPECT_LE(std::abs(scaled.at(n, l) - expected), 1e-9 * scale) << "t=" << t << " n=" << n << " l=" << l;
      }
    }
  }
}

TEST(DysonForms, ConvergenceMetadataAndFailure) {
  const auto inst = testing::reference_n3();
  const auto f = random_direction(2, 16, 2 * kPi, false, 1.0);
  const auto forms = dyson_forms(inst.system, f, 4);
  EXPECT_LT(forms.convergence_change(), 1e-9);
  EXPECT_GE(forms.substeps(), 2 * default_substeps(inst.system, f));

  DysonSettings hopeless;
  hopeless.substeps = 1;
  hopeless.tolerance = 1e-300;
  hopeless.max_substeps = 4;
  try {
    dyson_forms(inst.system, f, 4, hopeless);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
  }
  EXPECT_THROW(dyson_forms(inst.system, f, 0), Error);
  EXPECT_THROW((void)forms.at(5, 1), Error);
}

TEST(DefaultSubsteps, PhaseStepBound) {
  const auto sys = build_system(3, 7.0, 0.0, {1.0, 1.0}, 2 * kPi);
  const auto f = PiecewiseControl::zero(2 * kPi, 32);
  const int s = default_substeps(sys, f);
  EXPECT_LE(7.0 * f.step() / s, 0.1 + 1e-12);
  EXPECT_GT(7.0 * f.step() / (s - 1), 0.1);
}

TEST(ClosedForm, Examples) {
  const auto sys = build_system(4, 1.0, 0.0, {1.0, 1.0, 1.0}, 1.0);
  // <2|V^2|4> = v_2 v_3 = 1, divided by 2!.
  EXPECT_NEAR(closed_form_AlN(sys, PiecewiseControl::constant(1.0, 8, 1.0), 2, 2).real(), 0.5, 1e-15);
  const auto f = random_direction(8, 8, 1.0, false, 1.0);
  EXPECT_NEAR(closed_form_AlN(sys, f, 3, 1).real(), integral(f), 1e-15);
  const auto mz = project_mean_zero(f);
  for (int n = 1; n <= 3; ++n) EXPECT_LE(std::abs(closed_form_AlN(sys, mz, 2, n)), 1e-15);
  EXPECT_THROW(closed_form_AlN(sys, f, 1, 2), Error);
  EXPECT_THROW(closed_form_AlN(sys, f, 2, 4), Error);
}

TEST(KernelForm, Examples) {
  EXPECT_EQ(kernel_form_A1N(testing::reference_n3().system, PiecewiseControl::zero(2 * kPi, 16)), Complex(0, 0));
  const auto sys1 = testing::reference_n3(1.0, 0.0).system;
  const auto sys2 = testing::reference_n3(2.0, 0.0).system;
  // Continuum values 0 and i pi / 2; the grid error shrinks ~16x for 4x M.
  const double err1_64 = std::abs(kernel_form_A1N(sys1, testing::cosine_control(2 * kPi, 64)));
  const double err1_256 = std::abs(kernel_form_A1N(sys1, testing::cosine_control(2 * kPi, 256)));
  EXPECT_LE(err1_256, 1e-4);
  EXPECT_LE(err1_256, err1_64 / 10.0 + 1e-12);
  const Complex exact(0.0, kPi / 2);
  const double err2_64 = std::abs(kernel_form_A1N(sys2, testing::cosine_control(2 * kPi, 64)) - exact);
  const double err2_256 = std::abs(kernel_form_A1N(sys2, testing::cosine_control(2 * kPi, 256)) - exact);
  EXPECT_LE(err2_256, 1e-4);
  EXPECT_GT(err2_64 / err2_256, 10.0);
}

TEST(KernelBruteForce, AgreesWithReduction) {
  for (int n_levels : {3, 4}) {
    const auto sys = build_system(n_levels, 1.0, 0.0, std::vector<double>(n_levels - 1, 1.0), 2 * kPi);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto f = random_direction(seed, 32, 2 * kPi, true, 1.0);
      const Complex reduced = kernel_form_A1N(sys, f);
      const Complex brute = kernel_bruteforce_A1N(sys, f);
      EXPECT_LE(std::abs(reduced - brute), 1e-8 * (1.0 + std::abs(reduced)));
    }
  }
  // N = 5, nonzero mean, unequal couplings and a larger frequency.
  const auto sys5 = build_system(5, 3.0, 0.5, {0.7, -1.1, 1.3, 0.9}, 2.0);
  const auto f = random_direction(99, 12, 2.0, false, 1.0);
  EXPECT_LE(std::abs(kernel_form_A1N(sys5, f) - kernel_bruteforce_A1N(sys5, f)), 1e-10);
}

TEST(KernelBruteForce, LimitsAndZero) {
  const auto sys = testing::reference_n3().system;
  EXPECT_EQ(kernel_bruteforce_A1N(sys, PiecewiseControl::zero(2 * kPi, 16)), Complex(0, 0));
  try {
    kernel_bruteforce_A1N(sys, PiecewiseControl::zero(2 * kPi, 65));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooExpensive);
  }
  const auto sys6 = build_system(6, 1.0, 0.0, std::vector<double>(5, 1.0), 1.0);
  EXPECT_THROW(kernel_bruteforce_A1N(sys6, PiecewiseControl::zero(1.0, 4)), Error);
}

TEST(KernelForm, TriplePathConsistency) {
  for (int n_levels : {3, 4}) {
    const auto sys = build_system(n_levels, 1.0, 0.0, std::vector<double>(n_levels - 1, 1.0), 2 * kPi);
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
      const auto f = random_direction(seed, 32, 2 * kPi, true, 1.0);
      const Complex reduced = kernel_form_A1N(sys, f);
      const Complex brute = kernel_bruteforce_A1N(sys, f);
      const Complex dyson = dyson_forms(sys, f, n_levels - 1).at(n_levels - 1, 1);
      EXPECT_LE(std::abs(reduced - dyson), 1e-7);
      EXPECT_LE(std::abs(brute - dyson), 1e-7);
    }
  }
}

TEST(DysonResum, ZeroControl) {
  const auto sys = testing::reference_n3().system;
  EXPECT_LE(dyson_resum_defect(sys, PiecewiseControl::zero(2 * kPi, 16), 4, 4), 1e-12);
}

TEST(DysonResum, SmallControlWithinRemainderBound) {
  const auto sys = testing::reference_n3().system;
  auto f = random_direction(4, 32, 2 * kPi, false, 1.0);
  f = f.scaled(0.1 / norm(f));
  const double defect = dyson_resum_defect(sys, f, 8, 64);
  EXPECT_LT(defect, 1e-10);
  EXPECT_LE(defect, dyson_remainder_bound(sys, f, 8) + 1e-12);
}

TEST(DysonResum, DefectDecreasesWithOrder) {
  const auto sys = testing::reference_n4().system;
  const auto f = random_direction(6, 32, 2 * kPi, false, 0.2);
  double previous = INFINITY;
  for (int n_max = 0; n_max <= 8; ++n_max) {
    const double defect = dyson_resum_defect(sys, f, n_max, 64);
    EXPECT_LE(defect, previous * 1.01 + 1e-13) << "n_max=" << n_max;
    EXPECT_LE(defect, dyson_remainder_bound(sys, f, n_max) + 1e-12);
    previous = defect;
  }
}

}  // namespace
}  // namespace trapscope
