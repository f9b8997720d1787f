#pragma once

// Seeded generators for kets, unitaries, Hermitian operators, densities and
// projectors. Unitaries come from orthonormalized Gaussian complex matrices;
// all randomness flows through a caller-owned engine so runs are reproducible.

#include <random>

#include "cqt/numerics.hpp"

namespace cqt {

using Rng = std::mt19937_64;

inline Complex gaussian_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return Complex(re, im);
}

inline Ket random_ket(Eigen::Index dim, Rng& rng) {
  Ket v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = gaussian_complex(rng);
  return normalized(v);
}

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian_complex(rng);
  return m;
}

inline CMatrix random_unitary(Eigen::Index dim, Rng& rng) {
  // Gaussian columns are independent with probability one, so the
  // orthonormalization keeps all of them.
  while (true) {
    const CMatrix g = random_matrix(dim, dim, rng);
    std::vector<Ket> cols;
    cols.reserve(dim);
    for (Eigen::Index c = 0; c < dim; ++c) cols.push_back(g.col(c));
    const std::vector<Ket> basis = orthonormal_basis(cols);
    if (static_cast<Eigen::Index>(basis.size()) != dim) continue;
    CMatrix u(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) u.col(c) = basis[c];
    return u;
  }
}

inline CMatrix random_hermitian(Eigen::Index dim, Rng& rng, double scale = 1.0) {
  const CMatrix g = random_matrix(dim, dim, rng);
  return scale * 0.5 * (g + g.adjoint());
}

// Unit-trace positive matrix, full rank with probability one.
inline CMatrix random_density_matrix(Eigen::Index dim, Rng& rng) {
  const CMatrix g = random_matrix(dim, dim, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

inline CMatrix random_projector_matrix(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  if (rank < 0 || rank > dim) throw DimensionError("random_projector_matrix: bad rank");
  if (rank == 0) return CMatrix::Zero(dim, dim);
  const CMatrix u = random_unitary(dim, rng);
  const CMatrix block = u.leftCols(rank);
  return block * block.adjoint();
}

}  // namespace cqt
