#pragma once

// Dense complex matrix substrate for small Hilbert spaces: orthonormalization
// with rank decisions, Hermitian eigendecomposition with spectral clustering,
// and the unitary propagator exp(-iH(t-t0)).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

namespace tol {

// Named defaults; every operation that uses one accepts an override.
inline constexpr double norm = 1e-9;    // ket normalization
inline constexpr double herm = 1e-9;    // Hermiticity residual
inline constexpr double proj = 1e-9;    // idempotence / subspace equality
inline constexpr double comm = 1e-9;    // commutators, ordering, orthogonality
inline constexpr double rank = 1e-9;    // singular-value cutoff, relative to largest
inline constexpr double eig = 1e-8;     // eigenvalue clustering for spectral projectors
inline constexpr double psd = 1e-9;     // allowed negative-eigenvalue slack
inline constexpr double trace = 1e-9;   // unit-trace residual
inline constexpr double prob = 1e-10;   // probability normalization and truth cuts
inline constexpr double dec = 1e-9;     // decoherence functional off-diagonals
inline constexpr double zero = 1e-12;   // denominators treated as zero

}  // namespace tol

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct InconsistentFamilyError : Error {
  using Error::Error;
};
struct ZeroProbabilityError : Error {
  using Error::Error;
};
struct CapExceededError : Error {
  using Error::Error;
};

// Largest absolute entry; the matrix norm used for all residual checks.
inline double max_abs(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& m, double tolerance = tol::herm) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tolerance;
}

inline void require_finite(const CMatrix& m, const std::string& what) {
  if (!m.allFinite()) throw ValidationError(what + ": non-finite entries");
}

inline bool is_normalized(const Ket& v, double tolerance = tol::norm) {
  return std::abs(v.norm() - 1.0) <= tolerance;
}

inline Ket normalized(const Ket& v) {
  const double n = v.norm();
  if (n <= tol::zero) throw ValidationError("cannot normalize a (near-)zero vector");
  return v / n;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Fix the global phase so the first component with magnitude above the cut is
// positive real. Gives reproducible bases regardless of solver phase choices.
inline Ket canonical_phase(Ket v, double cut = 1e-9) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > cut) {
      v *= std::conj(v(i)) / mag;
      break;
    }
  }
  return v;
}

// Modified Gram-Schmidt in input order with a second sweep for stability.
// A vector joins the basis iff its residual exceeds rank_tol times the largest
// singular value of the stacked input, so rank decisions are relative.
inline std::vector<Ket> orthonormal_basis(const std::vector<Ket>& vectors,
                                          double rank_tol = tol::rank) {
  if (vectors.empty()) return {};
  const Eigen::Index dim = vectors.front().size();
  for (const Ket& v : vectors)
    if (v.size() != dim)
      throw DimensionError("orthonormal_basis: mixed vector dimensions");

  CMatrix stacked(dim, static_cast<Eigen::Index>(vectors.size()));
  for (Eigen::Index c = 0; c < stacked.cols(); ++c) stacked.col(c) = vectors[c];
  require_finite(stacked, "orthonormal_basis");
  const Eigen::JacobiSVD<CMatrix> svd(stacked);
  const double sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  const double cutoff = rank_tol * sigma_max;

  std::vector<Ket> basis;
  basis.reserve(vectors.size());
  for (const Ket& v : vectors) {
    Ket w = v;
    for (int sweep = 0; sweep < 2; ++sweep)
      for (const Ket& b : basis) w -= b * b.dot(w);
    const double residual = w.norm();
    if (residual > cutoff && residual > 0.0)
      basis.push_back(canonical_phase(w / residual));
  }
  return basis;
}

class Hamiltonian {
 public:
  explicit Hamiltonian(CMatrix m, double herm_tol = tol::herm) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
      throw DimensionError("Hamiltonian: matrix must be square and nonempty");
    require_finite(m_, "Hamiltonian");
    if (!is_hermitian(m_, herm_tol))
      throw ValidationError("Hamiltonian: matrix is not Hermitian");
  }

  static Hamiltonian zero(Eigen::Index dim) { return Hamiltonian(CMatrix::Zero(dim, dim)); }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

// U(t, t0) = exp(-iH(t-t0)), computed through the eigendecomposition of H.
// Exact for Hermitian generators; unitary to rounding.
inline CMatrix propagator(const Hamiltonian& h, double t, double t0) {
  if (!std::isfinite(t) || !std::isfinite(t0))
    throw ValidationError("propagator: times must be finite");
  const Eigen::Index d = h.dim();
  if (t == t0) return CMatrix::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw Error("propagator: eigendecomposition failed");
  const double dt = t - t0;
  Ket phases(d);
  for (Eigen::Index k = 0; k < d; ++k) phases(k) = std::polar(1.0, -es.eigenvalues()(k) * dt);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

struct HermitianEig {
  Eigen::VectorXd eigenvalues;  // descending
  CMatrix eigenvectors;         // orthonormal columns, aligned with eigenvalues
};

inline HermitianEig hermitian_eig(const CMatrix& m, double herm_tol = tol::herm) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eig: matrix must be square");
  require_finite(m, "hermitian_eig");
  if (!is_hermitian(m, herm_tol))
    throw ValidationError("hermitian_eig: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.info() != Eigen::Success) throw Error("hermitian_eig: eigendecomposition failed");
  const Eigen::Index d = m.rows();
  HermitianEig out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.eigenvalues(k) = es.eigenvalues()(d - 1 - k);
    out.eigenvectors.col(k) = canonical_phase(es.eigenvectors().col(d - 1 - k));
  }
  return out;
}

struct SpectralComponent {
  double eigenvalue;  // cluster mean
  CMatrix projector;  // onto the clustered eigenspace
};

// Groups eigenvalues into clusters separated by gaps larger than cluster_tol
// and returns one spectral projector per cluster.
inline std::vector<SpectralComponent> spectral_projectors(const CMatrix& m,
                                                          double cluster_tol = tol::eig,
                                                          double herm_tol = tol::herm) {
  const HermitianEig eig = hermitian_eig(m, herm_tol);
  const Eigen::Index d = eig.eigenvalues.size();
  std::vector<SpectralComponent> out;
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index stop = start + 1;
    while (stop < d && std::abs(eig.eigenvalues(stop) - eig.eigenvalues(stop - 1)) <= cluster_tol)
      ++stop;
    SpectralComponent c;
    c.eigenvalue = eig.eigenvalues.segment(start, stop - start).mean();
    const CMatrix block = eig.eigenvectors.middleCols(start, stop - start);
    c.projector = block * block.adjoint();
    out.push_back(std::move(c));
    start = stop;
  }
  return out;
}

}  // namespace cqt
