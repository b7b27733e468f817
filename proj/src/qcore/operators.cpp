#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "qwork/error.hpp"
#include "qwork/qcore.hpp"

namespace qwork::qcore {
namespace {

bool hermitian(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0e-300);
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTol * scale;
}

std::size_t checked_product(std::size_t a, std::size_t b, std::size_t cap) {
  if (a != 0 && b > cap / a) fail(ErrorKind::DimensionCap, "dimension cap exceeded");
  const std::size_t out = a * b;
  if (out > cap) fail(ErrorKind::DimensionCap, "dimension cap exceeded");
  return out;
}

// Splits every full index into (kept index, traced index) for the given factors.
struct TraceLayout {
  std::size_t kept_dim = 1;
  std::size_t traced_dim = 1;
  std::vector<std::size_t> kept_of;    // full -> kept
  std::vector<std::size_t> traced_of;  // full -> traced
};

TraceLayout layout_for(std::size_t full_dim, std::span<const std::size_t> dims, std::span<const std::size_t> keep) {
  if (dims.empty()) fail(ErrorKind::DimensionMismatch, "dimension mismatch");
  std::size_t product = 1;
  for (std::size_t d : dims) {
    if (d == 0) fail(ErrorKind::DimensionMismatch, "dimension mismatch");
    product *= d;
  }
  if (product != full_dim) fail(ErrorKind::DimensionMismatch, "dimension mismatch");
  if (keep.empty()) fail(ErrorKind::DimensionMismatch, "dimension mismatch: keep is empty");

  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size() || kept[k]) fail(ErrorKind::DimensionMismatch, "dimension mismatch: bad keep index");
    kept[k] = true;
  }

  TraceLayout out;
  for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? out.kept_dim : out.traced_dim) *= dims[f];
  out.kept_of.resize(full_dim);
  out.traced_of.resize(full_dim);
  std::vector<std::size_t> digits(dims.size(), 0);
  for (std::size_t idx = 0; idx < full_dim; ++idx) {
    std::size_t rem = idx;
    for (std::size_t f = dims.size(); f-- > 0;) {
      digits[f] = rem % dims[f];
      rem /= dims[f];
    }
    std::size_t ki = 0;
    std::size_t ti = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
      if (kept[f]) {
        ki = ki * dims[f] + digits[f];
      } else {
        ti = ti * dims[f] + digits[f];
      }
    }
    out.kept_of[idx] = ki;
    out.traced_of[idx] = ti;
  }
  return out;
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix entries) : entries_(std::move(entries)) {
  require(entries_.rows() > 0 && hermitian(entries_), ErrorKind::InvalidParameters, "operator is not Hermitian");
}

HermitianOperator::HermitianOperator(Matrix entries, Unchecked) : entries_(std::move(entries)) {}

HermitianOperator HermitianOperator::diagonal(std::span<const double> values) {
  require(!values.empty(), ErrorKind::InvalidParameters, "empty operator");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(std::isfinite(values[k]), ErrorKind::InvalidParameters, "non-finite energy");
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = values[k];
  }
  return HermitianOperator(std::move(m), Unchecked{});
}

HermitianOperator HermitianOperator::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return HermitianOperator(Matrix::Zero(n, n), Unchecked{});
}

bool HermitianOperator::is_diagonal(double tol) const {
  for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
      if (r != c && std::abs(entries_(r, c)) > tol) return false;
    }
  }
  return true;
}

std::vector<double> HermitianOperator::diagonal_values() const {
  std::vector<double> out(dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = entries_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  return out;
}

DensityOperator::DensityOperator(Matrix entries) : entries_(std::move(entries)) {
  require(entries_.rows() > 0 && hermitian(entries_), ErrorKind::InvalidParameters, "density operator is not Hermitian");
  require(std::abs(entries_.trace() - Complex(1.0, 0.0)) <= kTraceTol, ErrorKind::InvalidParameters,
          "density operator trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  require(solver.eigenvalues().minCoeff() >= -kPositivityTol, ErrorKind::InvalidParameters,
          "density operator is not positive semidefinite");
}

DensityOperator::DensityOperator(Matrix entries, Unchecked) : entries_(std::move(entries)) {}

DensityOperator DensityOperator::diagonal(std::span<const double> probs) {
  require(!probs.empty(), ErrorKind::InvalidParameters, "empty state");
  double total = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, ErrorKind::InvalidParameters, "negative probability");
    total += p;
  }
  require(std::abs(total - 1.0) <= kTraceTol, ErrorKind::InvalidParameters, "probabilities do not sum to 1");
  const auto n = static_cast<Eigen::Index>(probs.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = probs[static_cast<std::size_t>(k)];
  return DensityOperator(std::move(m), Unchecked{});
}

DensityOperator DensityOperator::pure(const Vector& psi) {
  require(psi.size() > 0 && std::abs(psi.squaredNorm() - 1.0) <= kTraceTol, ErrorKind::InvalidParameters,
          "state vector is not normalized");
  return DensityOperator(psi * psi.adjoint(), Unchecked{});
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  require(dim > 0, ErrorKind::InvalidParameters, "empty state");
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityOperator(Matrix::Identity(n, n) / static_cast<double>(dim), Unchecked{});
}

std::vector<double> DensityOperator::diagonal_probs() const {
  std::vector<double> out(dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = entries_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  return out;
}

Eigen::VectorXd DensityOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = solver.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) < -kPositivityTol) fail(ErrorKind::Validation, "density operator is not positive semidefinite");
    if (ev(k) < 0.0) ev(k) = 0.0;
  }
  return ev;
}

Matrix kron(const Matrix& a, const Matrix& b, std::size_t cap) {
  const std::size_t rows = checked_product(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()), cap);
  const std::size_t cols = checked_product(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()), cap);
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b, std::size_t cap) {
  const std::size_t rows = checked_product(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()), cap);
  const std::size_t cols = checked_product(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()), cap);
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Eigen::Index ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
      for (Eigen::Index kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
          triplets.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b, std::size_t cap) {
  return DensityOperator(kron(a.matrix(), b.matrix(), cap), Unchecked{});
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b, std::size_t cap) {
  return HermitianOperator(kron(a.matrix(), b.matrix(), cap), Unchecked{});
}

Matrix partial_trace(const Matrix& rho, std::span<const std::size_t> dims, std::span<const std::size_t> keep) {
  if (rho.rows() != rho.cols()) fail(ErrorKind::DimensionMismatch, "dimension mismatch");
  const TraceLayout lay = layout_for(static_cast<std::size_t>(rho.rows()), dims, keep);
  // full index for each (kept, traced) pair
  std::vector<std::size_t> full(lay.kept_dim * lay.traced_dim);
  for (std::size_t idx = 0; idx < full.size(); ++idx) full[lay.kept_of[idx] * lay.traced_dim + lay.traced_of[idx]] = idx;

  const auto n = static_cast<Eigen::Index>(lay.kept_dim);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < lay.kept_dim; ++i) {
    for (std::size_t j = 0; j < lay.kept_dim; ++j) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < lay.traced_dim; ++t) {
        acc += rho(static_cast<Eigen::Index>(full[i * lay.traced_dim + t]),
                   static_cast<Eigen::Index>(full[j * lay.traced_dim + t]));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return out;
}

Matrix partial_trace(const SparseMatrix& rho, std::span<const std::size_t> dims, std::span<const std::size_t> keep) {
  if (rho.rows() != rho.cols()) fail(ErrorKind::DimensionMismatch, "dimension mismatch");
  const TraceLayout lay = layout_for(static_cast<std::size_t>(rho.rows()), dims, keep);
  const auto n = static_cast<Eigen::Index>(lay.kept_dim);
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < rho.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(rho, k); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row());
      const auto c = static_cast<std::size_t>(it.col());
      if (lay.traced_of[r] == lay.traced_of[c]) {
        out(static_cast<Eigen::Index>(lay.kept_of[r]), static_cast<Eigen::Index>(lay.kept_of[c])) += it.value();
      }
    }
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> dims,
                              std::span<const std::size_t> keep) {
  return DensityOperator(partial_trace(rho.matrix(), dims, keep), Unchecked{});
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols() || u.rows() == 0) return false;
  const Matrix residual = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return residual.cwiseAbs().maxCoeff() <= tol;
}

DensityOperator apply_unitary(const DensityOperator& rho, const Matrix& u) {
  require(u.rows() == static_cast<Eigen::Index>(rho.dim()) && u.cols() == u.rows(), ErrorKind::DimensionMismatch,
          "dimension mismatch");
  require(is_unitary(u), ErrorKind::InvalidParameters, "not unitary");
  Matrix out = u * rho.matrix() * u.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator(std::move(out), Unchecked{});
}

double expectation(const DensityOperator& rho, const HermitianOperator& h) {
  require(rho.dim() == h.dim(), ErrorKind::DimensionMismatch, "dimension mismatch");
  return (rho.matrix().cwiseProduct(h.matrix().transpose())).sum().real();
}

}  // namespace qwork::qcore
