#pragma once

// Finite-dimensional state algebra: Hermitian operators, density operators,
// Kronecker products, partial traces, entropies (nats) and unitary action.
// Everything is dense except the SparseMatrix overloads used by the oracle.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qwork::qcore {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 20;

inline constexpr double kHermitianTol = 1e-12;  // relative to the largest entry
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kEntropyCutoff = 1e-14;

/// An energy eigenstate label: position in the basis and its energy.
struct BasisLabel {
  int index = 0;
  double energy = 0.0;
};

/// Tag for constructors that skip validation. Only for results that are
/// valid by construction (tensor products, partial traces, conjugations).
struct Unchecked {};

class HermitianOperator {
 public:
  /// Throws InvalidParameters unless the matrix is square and Hermitian.
  explicit HermitianOperator(Matrix entries);
  HermitianOperator(Matrix entries, Unchecked);

  static HermitianOperator diagonal(std::span<const double> values);
  static HermitianOperator zero(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  bool is_diagonal(double tol = 0.0) const;
  /// Real diagonal, meaningful as energies when is_diagonal().
  std::vector<double> diagonal_values() const;

 private:
  Matrix entries_;
};

class DensityOperator {
 public:
  /// Throws InvalidParameters unless Hermitian, unit trace and PSD within
  /// the kHermitianTol / kTraceTol / kPositivityTol tolerances.
  explicit DensityOperator(Matrix entries);
  DensityOperator(Matrix entries, Unchecked);

  static DensityOperator diagonal(std::span<const double> probs);
  /// |psi><psi| for a unit vector.
  static DensityOperator pure(const Vector& psi);
  static DensityOperator maximally_mixed(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  std::vector<double> diagonal_probs() const;
  /// Ascending eigenvalues with [-kPositivityTol, 0) clipped to zero.
  Eigen::VectorXd eigenvalues() const;

 private:
  Matrix entries_;
};

/// Throws DimensionCap when rows*rows' or cols*cols' exceeds `cap`.
Matrix kron(const Matrix& a, const Matrix& b, std::size_t cap = kDefaultDimensionCap);
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b, std::size_t cap = kDefaultDimensionCap);

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b,
                       std::size_t cap = kDefaultDimensionCap);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b,
                         std::size_t cap = kDefaultDimensionCap);

/// Traces out every factor not listed in `keep`. Kept factors appear in
/// ascending factor order. Throws DimensionMismatch on inconsistent dims.
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> dims,
                              std::span<const std::size_t> keep);
Matrix partial_trace(const Matrix& rho, std::span<const std::size_t> dims, std::span<const std::size_t> keep);
Matrix partial_trace(const SparseMatrix& rho, std::span<const std::size_t> dims,
                     std::span<const std::size_t> keep);

/// Shannon entropy of a probability vector in nats, 0 ln 0 = 0.
double shannon_entropy(std::span<const double> probs);

/// S(rho) = -tr(rho ln rho) in nats.
double von_neumann_entropy(const DensityOperator& rho);

/// S(rho || sigma) in nats; +infinity when supp(rho) is not inside supp(sigma).
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

bool is_unitary(const Matrix& u, double tol = kUnitaryTol);

/// U rho U^dagger. Throws InvalidParameters("not unitary") on a non-unitary U.
DensityOperator apply_unitary(const DensityOperator& rho, const Matrix& u);

/// tr(rho H), real part.
double expectation(const DensityOperator& rho, const HermitianOperator& h);

}  // namespace qwork::qcore
