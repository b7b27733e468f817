#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qwork/error.hpp"
#include "qwork/qcore.hpp"

namespace qwork::qcore {

double shannon_entropy(std::span<const double> probs) {
  double s = 0.0;
  for (double p : probs) {
    if (p > kEntropyCutoff) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const DensityOperator& rho) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  return shannon_entropy(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())));
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  require(rho.dim() == sigma.dim(), ErrorKind::DimensionMismatch, "dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> sig(sigma.matrix());
  const Matrix& v = sig.eigenvectors();
  const Eigen::VectorXd& lam = sig.eigenvalues();

  // tr(rho ln sigma) in sigma's eigenbasis; weight on sigma's kernel diverges.
  const Matrix rho_in_sigma = v.adjoint() * rho.matrix() * v;
  double cross = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    const double w = rho_in_sigma(k, k).real();
    if (lam(k) <= kEntropyCutoff) {
      if (w > 1e-12) return std::numeric_limits<double>::infinity();
      continue;
    }
    cross += w * std::log(lam(k));
  }
  return -von_neumann_entropy(rho) - cross;
}

}  // namespace qwork::qcore
