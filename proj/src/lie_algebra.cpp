#include <cmath>
#include <vector>

#include "trapscope/error.hpp"
#include "trapscope/landscape.hpp"

namespace trapscope {

namespace {

/// Real span of skew-Hermitian matrices under <X, Y> = Re Tr(X^dagger Y).
class OrthonormalSpan {
 public:
  explicit OrthonormalSpan(double tol) : tol_(tol) {}

  /// Adds m if its component outside the span exceeds tol * ||m||.
  /// Returns the normalized new direction, if any.
  bool add(const ComplexMatrix& m, ComplexMatrix& normalized) {
    const double n0 = m.norm();
    if (n0 == 0.0) return false;
    ComplexMatrix r = m / n0;
    // Classical Gram-Schmidt applied twice for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis_) {
        const double c = (q.conjugate().cwiseProduct(r)).sum().real();
        r -= c * q;
      }
    }
    const double n1 = r.norm();
    if (n1 <= tol_) return false;
    normalized = r / n1;
    basis_.push_back(normalized);
    return true;
  }

  [[nodiscard]] int size() const { return static_cast<int>(basis_.size()); }

 private:
  double tol_;
  std::vector<ComplexMatrix> basis_;
};

}  // namespace

LieAlgebraResult lie_rank(const ComplexMatrix& h0, const ComplexMatrix& v, double tol, int max_depth) {
  if (!(tol > 0.0)) throw Error(ErrorKind::DomainError, "Lie rank tolerance must be positive");
  if (max_depth < 1) throw Error(ErrorKind::DomainError, "Lie rank depth must be at least 1");
  require_square_finite(h0);
  require_square_finite(v);
  if (h0.rows() != v.rows()) throw Error(ErrorKind::BadDimension, "H0 and V sizes differ");
  const auto n = h0.rows();
  const Complex i{0.0, 1.0};
  const std::vector<ComplexMatrix> generators{i * h0, i * v};

  OrthonormalSpan span(tol);
  std::vector<ComplexMatrix> frontier;
  ComplexMatrix q;
  for (const auto& g : generators) {
    if (span.add(g, q)) frontier.push_back(q);
  }
  const int full = static_cast<int>(n * n);
  int depth = 1;
  while (!frontier.empty() && depth < max_depth && span.size() < full) {
    std::vector<ComplexMatrix> next;
    for (const auto& x : frontier) {
      for (const auto& g : generators) {
        if (span.add(g * x - x * g, q)) next.push_back(q);
      }
    }
    frontier = std::move(next);
    ++depth;
  }
  LieAlgebraResult result;
  result.dimension = span.size();
  result.saturated = result.dimension >= full - 1;
  result.depth_reached = depth;
  result.tolerance = tol;
  return result;
}

LieAlgebraResult lie_rank(const SystemSpec& sys, double tol, int max_depth) {
  return lie_rank(sys.free_hamiltonian(), sys.interaction_hamiltonian(), tol, max_depth);
}

}  // namespace trapscope
