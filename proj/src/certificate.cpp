#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

#include "trapscope/error.hpp"
#include "trapscope/landscape.hpp"

namespace trapscope {

namespace {

constexpr int kRemainderSamples = 50;
constexpr int kRemainderHalvings = 10;

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled exactly once and results are written by index, so the outcome does
/// not depend on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
}

Criterion make_criterion(std::string quantity, double measured, std::string relation, double threshold) {
  bool ok = false;
  if (relation == "<=") ok = measured <= threshold;
  if (relation == "<") ok = measured < threshold;
  if (relation == ">=") ok = measured >= threshold;
  if (relation == ">") ok = measured > threshold;
  return {std::move(quantity), measured, std::move(relation), threshold, ok};
}

Check make_check(std::string name, std::vector<Criterion> criteria, bool required = true) {
  Check check{std::move(name), true, required, std::move(criteria)};
  for (const auto& c : check.criteria) check.passed = check.passed && c.passed;
  return check;
}

double fit_allowance(const CertificateTolerances& tol, double reference) {
  return std::max(tol.fit_absolute, tol.fit_relative * std::abs(reference));
}

DirectionRecord analyze_direction(const ProblemInstance& inst, const CertificateConfig& config, int index) {
  const auto& sys = inst.system;
  const int levels = sys.levels();
  const int top = 2 * levels - 2;
  const auto f = certificate_direction(config, sys.horizon(), index);

  DysonSettings settings;
  settings.substeps = config.substeps;
  settings.tolerance = config.tolerances.dyson_convergence;
  const auto forms = dyson_forms(sys, f, top, settings);

  const int fit_order = top + config.fit_extra_orders;
  auto fit = taylor_fit(inst, f, fit_order, config.fit_radius, 2 * fit_order + 4);

  DirectionRecord rec{config.seed + static_cast<std::uint64_t>(index),
                      index % 2 == 0,
                      integral(f),
                      norm(f),
                      forms.substeps(),
                      forms.convergence_change(),
                      {},
                      std::nullopt,
                      std::move(fit),
                      0.0,
                      0.0,
                      0.0};
  for (int n = 1; n <= top; ++n) rec.differentials.push_back(differential(inst, forms, n));
  if (rec.mean_zero) rec.order_2N2 = order_2N2_value(inst, forms);

  // R(t) = sum_{k=2}^{2N-3} c_k t^k must stay below the coefficient noise
  // allowance on some |t| <= eps; eps starts at the fit radius and is halved.
  double eps = 2.0 * rec.fit.radius;
  double worst = 0.0;
  double allowance = 0.0;
  for (int halving = 0; halving <= kRemainderHalvings; ++halving) {
    eps *= 0.5;
    worst = -std::numeric_limits<double>::infinity();
    for (int s = -kRemainderSamples; s <= kRemainderSamples; ++s) {
      const double t = eps * s / kRemainderSamples;
      double r = 0.0;
      for (int k = 2; k <= top - 1; ++k) r += rec.fit.coefficient(k) * std::pow(t, k);
      worst = std::max(worst, r);
    }
    allowance = 0.0;
    for (int k = 2; k <= top - 1; ++k) allowance += config.tolerances.fit_absolute * std::pow(eps, k);
    if (worst <= allowance) break;
  }
  rec.remainder_epsilon = eps;
  rec.remainder_max = worst;
  rec.remainder_tolerance = allowance;
  return rec;
}

std::vector<Check> assemble_checks(const ProblemInstance& inst, const CertificateConfig& config,
                                   const std::vector<DirectionRecord>& dirs) {
  const auto& tol = config.tolerances;
  const auto& sys = inst.system;
  const int levels = sys.levels();
  const int top = 2 * levels - 2;
  const double lambda_penult = inst.observable.eigenvalue(levels - 1);
  const double v_last = sys.coupling(levels - 1);
  constexpr double kTiny = 1e-300;

  double stat_analytic = 0.0;
  double stat_fit = 0.0;
  double descent_fit_rel = 0.0;
  double descent_analytic_rel = 0.0;
  double descent_fit_max = -std::numeric_limits<double>::infinity();
  double descent_analytic_max = -std::numeric_limits<double>::infinity();
  double flat_analytic = 0.0;
  double flat_fit = 0.0;
  double order_identity = 0.0;
  double order_fit = 0.0;
  double order_min = std::numeric_limits<double>::infinity();
  double order_fit_min = std::numeric_limits<double>::infinity();
  double remainder = -std::numeric_limits<double>::infinity();
  double consistency = 0.0;

  for (const auto& d : dirs) {
    stat_analytic = std::max(stat_analytic, std::abs(d.differentials[0]));
    stat_fit = std::max(stat_fit, std::abs(d.fit.coefficient(1)));
    remainder = std::max(remainder, d.remainder_max - d.remainder_tolerance);
    for (int n = 1; n <= top; ++n) {
      const double analytic = d.differentials[n - 1];
      consistency = std::max(consistency, std::abs(d.fit.coefficient(n) - analytic) / fit_allowance(tol, analytic));
    }
    if (!d.mean_zero) {
      const double expected = lambda_penult * v_last * v_last * d.integral * d.integral;
      const double c2 = d.fit.coefficient(2);
      descent_fit_rel = std::max(descent_fit_rel, std::abs(c2 - expected) / std::max(std::abs(expected), kTiny));
      descent_analytic_rel =
          std::max(descent_analytic_rel, std::abs(d.differentials[1] - expected) / std::max(std::abs(expected), kTiny));
      descent_fit_max = std::max(descent_fit_max, c2);
      descent_analytic_max = std::max(descent_analytic_max, d.differentials[1]);
    } else {
      for (int n = 2; n <= top - 1; ++n) {
        flat_analytic = std::max(flat_analytic, std::abs(d.differentials[n - 1]) / std::pow(1.0 + d.norm, n));
        flat_fit = std::max(flat_fit, std::abs(d.fit.coefficient(n)));
      }
      const double value = *d.order_2N2;
      const double analytic = d.differentials[top - 1];
      const double fitted = d.fit.coefficient(top);
      order_identity = std::max(order_identity, std::abs(analytic - value) / std::max(std::abs(value), 1e-12));
      order_fit = std::max(order_fit, std::abs(fitted - value) / fit_allowance(tol, value));
      order_min = std::min(order_min, value);
      order_fit_min = std::min(order_fit_min, fitted);
    }
  }

  std::vector<Check> checks;
  checks.push_back(make_check("stationarity",
                              {make_criterion("max |differential(1)|", stat_analytic, "<=", tol.stationarity_analytic),
                               make_criterion("max |fitted c1|", stat_fit, "<=", tol.stationarity_fit)}));
  checks.push_back(make_check(
      "mean_descent",
      {make_criterion("max relative error of fitted c2 vs lambda_{N-1} v_{N-1}^2 (int f)^2", descent_fit_rel, "<=",
                      tol.descent_relative),
       make_criterion("max relative error of differential(2) vs lambda_{N-1} v_{N-1}^2 (int f)^2",
                      descent_analytic_rel, "<=", tol.identity_relative),
       make_criterion("max fitted c2", descent_fit_max, "<", 0.0),
       make_criterion("max differential(2)", descent_analytic_max, "<", 0.0)}));
  checks.push_back(make_check(
      "flatness_3_to_2N-3",
      {make_criterion("max |differential(n)| / (1 + ||f||)^n, 2 <= n <= 2N-3", flat_analytic, "<=",
                      tol.flatness_analytic),
       make_criterion("max |fitted c_n|, 2 <= n <= 2N-3", flat_fit, "<=", tol.fit_absolute)}));
  checks.push_back(make_check(
      "order_2N-2_match",
      {make_criterion("max relative gap differential(2N-2) vs lambda_1 |A^{N-1}_{1N}|^2", order_identity, "<=",
                      tol.identity_relative),
       make_criterion("max |fitted c_{2N-2} - lambda_1 |A^{N-1}_{1N}|^2| / allowance", order_fit, "<=", 1.0)}));
  checks.push_back(make_check("order_2N-2_nonneg",
                              {make_criterion("min lambda_1 |A^{N-1}_{1N}|^2", order_min, ">=", 0.0),
                               make_criterion("min fitted c_{2N-2}", order_fit_min, ">=", tol.nonneg_floor)}));
  checks.push_back(make_check(
      "remainder_nonpositive",
      {make_criterion("max over directions of [max_{|t|<=eps} sum_{k=2}^{2N-3} c_k t^k - allowance]", remainder,
                      "<=", 0.0)}));
  checks.push_back(make_check(
      "fit_consistency",
      {make_criterion("max |fitted c_n - differential(n)| / allowance, 1 <= n <= 2N-2", consistency, "<=", 1.0)}));
  return checks;
}

}  // namespace

PiecewiseControl certificate_direction(const CertificateConfig& config, double horizon, int index) {
  const auto seed = config.seed + static_cast<std::uint64_t>(index);
  auto f = random_direction(seed, config.segments, horizon, true, config.amplitude);
  if (index % 2 == 0) return f;
  return f.shifted(0.5 * config.amplitude);
}

TrapReport trap_certificate(const ProblemInstance& inst, const CertificateConfig& config) {
  const auto& sys = inst.system;
  const auto& obs = inst.observable;
  if (!obs.theorem_mode()) {
    throw Error(ErrorKind::OrderingViolation, "certificate requires a theorem-mode observable");
  }
  if (inst.initial_level != sys.levels()) {
    throw Error(ErrorKind::DomainError, "certificate requires rho0 = |N><N|");
  }
  if (config.directions < 2 || config.segments < 1) {
    throw Error(ErrorKind::InvalidArgument, "certificate needs at least two directions and one segment");
  }
  const int levels = sys.levels();

  TrapReport report;
  report.levels = levels;
  report.a = sys.a();
  report.b = sys.b();
  report.horizon = sys.horizon();
  report.couplings.assign(sys.couplings().begin(), sys.couplings().end());
  report.raw_eigenvalues = obs.raw_eigenvalues();
  report.eigenvalues.assign(obs.eigenvalues().begin(), obs.eigenvalues().end());
  report.shift = obs.shift();
  report.claimed_order = 2 * levels - 3;
  report.config = config;
  if (report.config.witness_horizons.empty()) {
    report.config.witness_horizons = {sys.horizon(), 2.0 * sys.horizon()};
  }

  // Directions.
  std::vector<std::optional<DirectionRecord>> records(config.directions);
  std::vector<std::string> errors(config.directions);
  parallel_for(config.directions, config.threads, [&](int i) {
    try {
      records[i] = analyze_direction(inst, config, i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < config.directions; ++i) {
    if (!errors[i].empty()) {
      report.failure = StageFailure{"direction " + std::to_string(i), errors[i]};
      break;
    }
    report.directions.push_back(std::move(*records[i]));
  }
  if (!report.failure) report.checks = assemble_checks(inst, config, report.directions);

  // Controllability.
  try {
    report.lie = lie_rank(sys, config.tolerances.lie, config.lie_max_depth);
    report.checks.push_back(make_check(
        "controllable", {make_criterion("Lie algebra dimension", report.lie->dimension, ">=", levels * levels - 1)}));
  } catch (const std::exception& e) {
    if (!report.failure) report.failure = StageFailure{"controllability", e.what()};
  }

  // Non-optimality witness; reported but not required.
  try {
    for (double horizon : report.config.witness_horizons) {
      const auto shifted = make_instance(sys.with_horizon(horizon), obs, inst.initial_level);
      const auto w = witness_search(shifted, config.seed, config.witness_budget, config.witness_amplitudes,
                                    config.segments);
      report.witness.push_back({horizon, w.value, w.raw_value, w.threshold, w.success, w.evaluations});
      report.witness_found = report.witness_found || w.success;
    }
    double best = -std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    for (const auto& w : report.witness) {
      if (w.value - w.threshold > best - threshold) {
        best = w.value;
        threshold = w.threshold;
      }
    }
    report.checks.push_back(
        make_check("witness_found", {make_criterion("best J over horizons", best, ">", threshold)}, false));
  } catch (const std::exception& e) {
    if (!report.failure) report.failure = StageFailure{"witness", e.what()};
  }

  report.passed = !report.failure.has_value();
  for (const auto& c : report.checks) {
    if (c.required) report.passed = report.passed && c.passed;
  }
  return report;
}

}  // namespace trapscope
