#include <cmath>

#include "trapscope/error.hpp"
#include "trapscope/landscape.hpp"

namespace trapscope {

namespace {

constexpr int kRefinementRounds = 5;

}  // namespace

WitnessResult witness_search(const ProblemInstance& inst, std::uint64_t seed, int budget,
                             std::pair<double, double> amplitude_range, int segments) {
  if (budget < 1) throw Error(ErrorKind::DomainError, "witness budget must be at least 1");
  if (segments < 1) throw Error(ErrorKind::DomainError, "witness search needs at least one segment");
  const auto [lo, hi] = amplitude_range;
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorKind::DomainError, "amplitude range must satisfy 0 < lo <= hi");
  }
  const auto& sys = inst.system;
  const double horizon = sys.horizon();
  int evaluations = 0;
  auto evaluate = [&](const PiecewiseControl& f) {
    ++evaluations;
    return objective(propagate(sys, f), inst);
  };

  const double baseline = evaluate(PiecewiseControl::zero(horizon, segments));
  const auto& obs = inst.observable;
  const double threshold =
      baseline + 0.01 * (obs.eigenvalue(1) - obs.eigenvalue(obs.levels()));

  UniformStream stream(seed);
  PiecewiseControl best = PiecewiseControl::zero(horizon, segments);
  double best_value = -INFINITY;
  double best_amplitude = hi;
  for (int trial = 0; trial < budget; ++trial) {
    const double amplitude = stream.next(lo, hi);
    std::vector<double> values(segments);
    for (double& x : values) x = stream.next(-amplitude, amplitude);
    PiecewiseControl candidate(horizon, std::move(values));
    const double value = evaluate(candidate);
    if (value > best_value) {
      best_value = value;
      best = std::move(candidate);
      best_amplitude = amplitude;
    }
  }

  double step = 0.25 * best_amplitude;
  for (int round = 0; round < kRefinementRounds; ++round) {
    bool improved = false;
    for (int j = 0; j < segments; ++j) {
      for (double delta : {step, -step}) {
        auto trial = best.with_value(j, best.value(j) + delta);
        const double value = evaluate(trial);
        if (value > best_value) {
          best_value = value;
          best = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  return {best, best_value, best_value + obs.shift(), threshold, best_value > threshold, evaluations};
}

}  // namespace trapscope
