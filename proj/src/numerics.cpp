#include "trapscope/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "trapscope/error.hpp"

namespace trapscope {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::ZeroCoupling: return "ZeroCoupling";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::TooExpensive: return "TooExpensive";
    case ErrorKind::InsufficientOrder: return "InsufficientOrder";
    case ErrorKind::NonRealResult: return "NonRealResult";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

void require_square_finite(const ComplexMatrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw Error(ErrorKind::BadDimension,
                "expected a non-empty square matrix, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::DomainError, "matrix has non-finite entries");
  }
}

double hermiticity_defect(const ComplexMatrix& h) {
  require_square_finite(h);
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition hermitian_eig(const ComplexMatrix& h) {
  const double defect = hermiticity_defect(h);
  if (defect > kHermitianTolerance) {
    throw Error(ErrorKind::NotHermitian, "max |H - H^dagger| = " + std::to_string(defect));
  }
  // The solver reads only the lower triangle; symmetrize so both halves count.
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonConvergence, "Hermitian eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_mih(const EigenDecomposition& eig, double s) {
  const auto& q = eig.eigenvectors;
  ComplexVector phases(eig.eigenvalues.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::polar(1.0, -s * eig.eigenvalues(k));
  }
  return q * phases.asDiagonal() * q.adjoint();
}

ComplexMatrix expm_mih(const ComplexMatrix& h, double s) { return expm_mih(hermitian_eig(h), s); }

double unitarity_defect(const ComplexMatrix& u) {
  require_square_finite(u);
  const auto n = u.rows();
  return (u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm();
}

double hermitian_spectral_norm(const ComplexMatrix& h) {
  return hermitian_eig(h).eigenvalues.cwiseAbs().maxCoeff();
}

QuadratureRule gauss_legendre(int points) {
  if (points < 1) {
    throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one node");
  }
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const int half = (points + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (points == 1) {
        p1 = x;
        p0 = 1.0;
      }
      derivative = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (points == 1) {
      rule.nodes[0] = 0.0;
      rule.weights[0] = 2.0;
      return rule;
    }
    const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    rule.nodes[i] = -x;
    rule.nodes[points - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[points - 1 - i] = w;
  }
  return rule;
}

}  // namespace trapscope
