#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace trapscope {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Entrywise bound on |H - H^dagger| accepted as Hermitian.
inline constexpr double kHermitianTolerance = 1e-12;

struct EigenDecomposition {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors; // columns, unitary
};

/// Largest entrywise |H - H^dagger|. Requires a square matrix.
double hermiticity_defect(const ComplexMatrix& h);

/// Throws BadDimension / DomainError unless `m` is square, non-empty and finite.
void require_square_finite(const ComplexMatrix& m);

/// H = Q diag(w) Q^dagger with ascending w. Throws NotHermitian.
EigenDecomposition hermitian_eig(const ComplexMatrix& h);

/// exp(-i s H) for Hermitian H, assembled from the eigendecomposition.
ComplexMatrix expm_mih(const ComplexMatrix& h, double s);
ComplexMatrix expm_mih(const EigenDecomposition& eig, double s);

/// ||U^dagger U - I||_F.
double unitarity_defect(const ComplexMatrix& u);

/// ||H||_2 for Hermitian H (largest |eigenvalue|).
double hermitian_spectral_norm(const ComplexMatrix& h);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int points);

}  // namespace trapscope
