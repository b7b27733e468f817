#pragma once

#include <random>

#include "qwork/qcore.hpp"

namespace testutil {

inline qwork::qcore::Matrix random_density_matrix(std::size_t d, std::mt19937_64& rng, std::size_t rank = 0) {
  std::normal_distribution<double> g;
  const auto cols = static_cast<Eigen::Index>(rank == 0 ? d : rank);
  qwork::qcore::Matrix a(static_cast<Eigen::Index>(d), cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = {g(rng), g(rng)};
  qwork::qcore::Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline qwork::qcore::DensityOperator random_density(std::size_t d, std::mt19937_64& rng, std::size_t rank = 0) {
  return qwork::qcore::DensityOperator(random_density_matrix(d, rng, rank));
}

}  // namespace testutil
