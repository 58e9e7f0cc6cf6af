#include "trapscope/landscape.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "trapscope/error.hpp"

namespace trapscope {

namespace {

constexpr double kImaginaryResidue = 1e-10;
constexpr double kMaxCondition = 1e12;
constexpr int kMaxShrinks = 6;

void require_forms_for(const ProblemInstance& inst, const DysonForms& forms, int n) {
  if (inst.initial_level != inst.system.levels()) {
    throw Error(ErrorKind::DomainError, "differentials are defined for rho0 = |N><N| only");
  }
  if (forms.levels() != inst.system.levels()) {
    throw Error(ErrorKind::BadDimension, "forms were computed for a different system");
  }
  if (n > forms.n_max()) {
    throw Error(ErrorKind::InsufficientOrder, "order " + std::to_string(n) + " requested but forms stop at " +
                                                  std::to_string(forms.n_max()));
  }
}

}  // namespace

double differential(const ProblemInstance& inst, const DysonForms& forms, int n) {
  if (n < 1) throw Error(ErrorKind::DomainError, "differential order must be at least 1");
  require_forms_for(inst, forms, n);
  const int levels = inst.system.levels();
  // i^n with exact integer powers.
  static constexpr Complex kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex i_n = kIPowers[n % 4];

  Complex sum{};
  double magnitude = 0.0;
  for (int l = 1; l < levels; ++l) {
    const double lambda = inst.observable.eigenvalue(l);
    if (lambda == 0.0) continue;
    for (int j = 0; j <= n; ++j) {
      const Complex left = forms.at(j, l);
      const Complex right = forms.at(n - j, l);
      const double sign = ((n - j) % 2 == 0) ? 1.0 : -1.0;
      sum += sign * i_n * lambda * left * std::conj(right);
      magnitude += std::abs(lambda) * std::abs(left) * std::abs(right);
    }
  }
  if (std::abs(sum.imag()) > kImaginaryResidue * magnitude) {
    throw Error(ErrorKind::NonRealResult, "order " + std::to_string(n) + " differential has imaginary part " +
                                              format_real(sum.imag()) + " against magnitude " +
                                              format_real(magnitude));
  }
  return sum.real();
}

double order_2N2_value(const ProblemInstance& inst, const DysonForms& forms) {
  const int levels = inst.system.levels();
  require_forms_for(inst, forms, levels - 1);
  return inst.observable.eigenvalue(1) * std::norm(forms.at(levels - 1, 1));
}

TaylorFit taylor_fit(const ProblemInstance& inst, const PiecewiseControl& f, int max_order, double radius,
                     int points) {
  if (!(radius > 0.0)) throw Error(ErrorKind::DomainError, "fit radius must be positive");
  if (max_order < 1) throw Error(ErrorKind::DomainError, "fit order must be at least 1");
  if (points < 2 * max_order + 4) {
    throw Error(ErrorKind::DomainError, "need at least 2*max_order + 4 points per side");
  }
  const auto& sys = inst.system;
  const double base = objective(propagate(sys, PiecewiseControl::zero(f.horizon(), f.segments())), inst);

  // Scaled abscissae u = t / radius are fixed, so the design matrix (and its
  // conditioning) does not depend on the radius.
  const int samples = 2 * points;
  Eigen::VectorXd u(samples);
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i + 1) / points;
    u(points - 1 - i) = -x;
    u(points + i) = x;
  }
  Eigen::MatrixXd design(samples, max_order);
  for (int r = 0; r < samples; ++r) {
    double p = 1.0;
    for (int k = 0; k < max_order; ++k) {
      p *= u(r);
      design(r, k) = p;
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double condition = sv(0) / sv(sv.size() - 1);
  if (!(condition <= kMaxCondition)) {
    throw Error(ErrorKind::IllConditioned, "Taylor design condition number " + format_real(condition));
  }

  TaylorFit fit{f, max_order, {}, 0.0, radius, 0, false, condition};
  double r = radius;
  for (int shrink = 0; shrink <= kMaxShrinks; ++shrink) {
    Eigen::VectorXd g(samples);
    for (int i = 0; i < samples; ++i) {
      g(i) = objective(propagate(sys, f.scaled(r * u(i))), inst) - base;
    }
    const Eigen::VectorXd scaled = svd.solve(g);
    const double residual = (design * scaled - g).cwiseAbs().maxCoeff();

    fit.coefficients.assign(max_order, 0.0);
    double rk = 1.0;
    for (int k = 0; k < max_order; ++k) {
      rk *= r;
      fit.coefficients[k] = scaled(k) / rk;
    }
    fit.residual = residual;
    fit.radius = r;
    fit.shrinks = shrink;
    // |c_max| r^max is the scaled top coefficient.
    if (residual <= 1e-3 * std::abs(scaled(max_order - 1))) {
      fit.accepted = true;
      break;
    }
    r *= 0.5;
  }
  return fit;
}

}  // namespace trapscope
