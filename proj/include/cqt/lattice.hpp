#pragma once

// The property calculus on subspaces of a finite Hilbert space: meet (the
// intersection), join (the span), orthogonal complement, the subspace
// ordering, orthogonality and commutation-compatibility, plus an axiom
// checker that exhibits where the lattice is and is not Boolean.

#include <optional>
#include <utility>
#include <vector>

#include "cqt/numerics.hpp"

namespace cqt {

class Projector {
 public:
  explicit Projector(CMatrix m, double proj_tol = tol::proj, double herm_tol = tol::herm)
      : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
      throw DimensionError("Projector: matrix must be square and nonempty");
    require_finite(m_, "Projector");
    if (max_abs(m_ - m_.adjoint()) > herm_tol)
      throw ValidationError("Projector: matrix is not Hermitian");
    if (max_abs(m_ * m_ - m_) > proj_tol)
      throw ValidationError("Projector: matrix is not idempotent");
  }

  static Projector zero(Eigen::Index dim) { return Projector(CMatrix::Zero(dim, dim)); }
  static Projector identity(Eigen::Index dim) { return Projector(CMatrix::Identity(dim, dim)); }

  Eigen::Index dim() const { return m_.rows(); }
  Eigen::Index rank() const { return static_cast<Eigen::Index>(std::lround(m_.real().trace())); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

// A subspace keeps an orthonormal basis (empty for the zero subspace O) and
// its projector, built once at construction. Values are immutable.
class Subspace {
 public:
  static Subspace zero(Eigen::Index ambient_dim) {
    return Subspace(ambient_dim, {}, CMatrix::Zero(ambient_dim, ambient_dim));
  }

  static Subspace full(Eigen::Index ambient_dim) {
    std::vector<Ket> basis;
    for (Eigen::Index i = 0; i < ambient_dim; ++i) {
      Ket e = Ket::Zero(ambient_dim);
      e(i) = 1.0;
      basis.push_back(std::move(e));
    }
    return Subspace(ambient_dim, std::move(basis), CMatrix::Identity(ambient_dim, ambient_dim));
  }

  static Subspace span_of(const std::vector<Ket>& spanning, double rank_tol = tol::rank) {
    if (spanning.empty()) throw DimensionError("Subspace::span_of: need the ambient dimension; use zero()");
    return from_orthonormal(spanning.front().size(), orthonormal_basis(spanning, rank_tol));
  }

  static Subspace ray(const Ket& v) { return span_of({v}); }

  // Accepts an already orthonormal set (validated) without re-deriving it.
  static Subspace from_orthonormal(Eigen::Index ambient_dim, std::vector<Ket> basis,
                                   double gram_tol = 1e-10) {
    if (ambient_dim < 1) throw DimensionError("Subspace: ambient dimension must be >= 1");
    CMatrix p = CMatrix::Zero(ambient_dim, ambient_dim);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (basis[i].size() != ambient_dim)
        throw DimensionError("Subspace: basis vector has wrong dimension");
      for (std::size_t k = 0; k <= i; ++k) {
        const Complex g = basis[k].dot(basis[i]);
        const double expect = (k == i) ? 1.0 : 0.0;
        if (std::abs(g - expect) > gram_tol)
          throw ValidationError("Subspace: basis is not orthonormal");
      }
      p += basis[i] * basis[i].adjoint();
    }
    return Subspace(ambient_dim, std::move(basis), std::move(p));
  }

  static Subspace from_projector(const Projector& p, double rank_tol = tol::rank) {
    const HermitianEig eig = hermitian_eig(p.matrix());
    std::vector<Ket> basis;
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
      const double lam = eig.eigenvalues(k);
      if (lam > 0.5) basis.push_back(eig.eigenvectors.col(k));
      else if (lam > rank_tol && lam < 1.0 - rank_tol)
        throw ValidationError("Subspace::from_projector: spectrum not in {0,1}");
    }
    return Subspace(p.dim(), std::move(basis), p.matrix());
  }

  Eigen::Index ambient_dim() const { return ambient_dim_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  bool is_zero() const { return basis_.empty(); }
  bool is_full() const { return dim() == ambient_dim_; }
  const std::vector<Ket>& basis() const { return basis_; }
  const Projector& projector() const { return proj_; }
  const CMatrix& projector_matrix() const { return proj_.matrix(); }

 private:
  Subspace(Eigen::Index ambient_dim, std::vector<Ket> basis, CMatrix proj)
      : ambient_dim_(ambient_dim), basis_(std::move(basis)), proj_(std::move(proj)) {}

  Eigen::Index ambient_dim_;
  std::vector<Ket> basis_;
  Projector proj_;
};

inline void require_same_ambient(const Subspace& a, const Subspace& b, const char* op) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionError(std::string(op) + ": ambient dimensions differ");
}

// Subspace equality is projector distance, since bases are not unique.
inline double subspace_distance(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b, "subspace_distance");
  return max_abs(a.projector_matrix() - b.projector_matrix());
}

inline bool subspace_equal(const Subspace& a, const Subspace& b, double tolerance = tol::proj) {
  return subspace_distance(a, b) <= tolerance;
}

// A q-and B: the intersection, computed as the joint null space of I-[A] and
// I-[B] stacked. A direct rank decision, no iterative limit.
inline Subspace q_meet(const Subspace& a, const Subspace& b, double rank_tol = tol::rank) {
  require_same_ambient(a, b, "q_meet");
  const Eigen::Index d = a.ambient_dim();
  CMatrix stacked(2 * d, d);
  stacked.topRows(d) = CMatrix::Identity(d, d) - a.projector_matrix();
  stacked.bottomRows(d) = CMatrix::Identity(d, d) - b.projector_matrix();
  const Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const double sigma_max = svd.singularValues()(0);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > rank_tol * sigma_max) ++rank;
  const Eigen::Index nullity = d - rank;
  if (nullity == 0) return Subspace::zero(d);
  std::vector<Ket> basis;
  basis.reserve(nullity);
  for (Eigen::Index k = rank; k < d; ++k)
    basis.push_back(canonical_phase(svd.matrixV().col(k)));
  return Subspace::from_orthonormal(d, std::move(basis));
}

// A q-or B: the span.
inline Subspace q_join(const Subspace& a, const Subspace& b, double rank_tol = tol::rank) {
  require_same_ambient(a, b, "q_join");
  std::vector<Ket> all = a.basis();
  all.insert(all.end(), b.basis().begin(), b.basis().end());
  if (all.empty()) return Subspace::zero(a.ambient_dim());
  return Subspace::from_orthonormal(a.ambient_dim(), orthonormal_basis(all, rank_tol));
}

// q-not A: the orthogonal complement, with [not A] = I - [A].
inline Subspace q_not(const Subspace& a, double rank_tol = tol::rank) {
  const Eigen::Index d = a.ambient_dim();
  const CMatrix complement = CMatrix::Identity(d, d) - a.projector_matrix();
  return Subspace::from_projector(Projector(complement), rank_tol);
}

// A <= B decided algebraically through [B][A] = [A].
inline bool q_leq(const Subspace& a, const Subspace& b, double tolerance = tol::comm) {
  require_same_ambient(a, b, "q_leq");
  return max_abs(b.projector_matrix() * a.projector_matrix() - a.projector_matrix()) <= tolerance;
}

inline bool is_orthogonal(const Subspace& a, const Subspace& b, double tolerance = tol::comm) {
  require_same_ambient(a, b, "is_orthogonal");
  return max_abs(a.projector_matrix() * b.projector_matrix()) <= tolerance;
}

// Compatible iff the projectors commute.
inline bool is_compatible(const Subspace& a, const Subspace& b, double tolerance = tol::comm) {
  require_same_ambient(a, b, "is_compatible");
  const CMatrix& pa = a.projector_matrix();
  const CMatrix& pb = b.projector_matrix();
  return max_abs(pa * pb - pb * pa) <= tolerance;
}

struct OrtholatticeReport {
  // Maximum residuals (projector distance) over all pairs/triples sampled.
  double identity_laws = 0.0;     // A v O = A,  A ^ H = A
  double complement_laws = 0.0;   // A v -A = H,  A ^ -A = O
  double commutativity = 0.0;     // both operations
  double associativity = 0.0;     // both operations
  double involution = 0.0;        // --A = A
  double de_morgan = 0.0;         // -(A v B) = -A ^ -B
  double distributivity = 0.0;    // fails on generic samples

  bool ortholattice_laws_hold(double tolerance = tol::proj) const {
    return identity_laws <= tolerance && complement_laws <= tolerance &&
           commutativity <= tolerance && associativity <= tolerance && involution <= tolerance &&
           de_morgan <= tolerance;
  }
};

// Evaluates the lattice laws on every pair and triple drawn from the sample.
// The distributive residual is reported but deliberately not part of
// ortholattice_laws_hold: it is the law the subspace lattice breaks.
inline OrtholatticeReport check_ortholattice_axioms(const std::vector<Subspace>& sample,
                                                    double rank_tol = tol::rank) {
  OrtholatticeReport r;
  if (sample.empty()) return r;
  const Eigen::Index d = sample.front().ambient_dim();
  const Subspace O = Subspace::zero(d);
  const Subspace H = Subspace::full(d);
  auto track = [](double& slot, double v) {
    if (v > slot) slot = v;
  };
  for (const Subspace& a : sample) {
    track(r.identity_laws, subspace_distance(q_join(a, O, rank_tol), a));
    track(r.identity_laws, subspace_distance(q_meet(a, H, rank_tol), a));
    const Subspace na = q_not(a, rank_tol);
    track(r.complement_laws, subspace_distance(q_join(a, na, rank_tol), H));
    track(r.complement_laws, subspace_distance(q_meet(a, na, rank_tol), O));
    track(r.involution, subspace_distance(q_not(na, rank_tol), a));
  }
  for (const Subspace& a : sample)
    for (const Subspace& b : sample) {
      track(r.commutativity, subspace_distance(q_join(a, b, rank_tol), q_join(b, a, rank_tol)));
      track(r.commutativity, subspace_distance(q_meet(a, b, rank_tol), q_meet(b, a, rank_tol)));
      track(r.de_morgan, subspace_distance(q_not(q_join(a, b, rank_tol), rank_tol),
                                           q_meet(q_not(a, rank_tol), q_not(b, rank_tol), rank_tol)));
    }
  for (const Subspace& a : sample)
    for (const Subspace& b : sample)
      for (const Subspace& c : sample) {
        track(r.associativity,
              subspace_distance(q_join(a, q_join(b, c, rank_tol), rank_tol),
                                q_join(q_join(a, b, rank_tol), c, rank_tol)));
        track(r.associativity,
              subspace_distance(q_meet(a, q_meet(b, c, rank_tol), rank_tol),
                                q_meet(q_meet(a, b, rank_tol), c, rank_tol)));
        track(r.distributivity,
              subspace_distance(q_meet(a, q_join(b, c, rank_tol), rank_tol),
                                q_join(q_meet(a, b, rank_tol), q_meet(a, c, rank_tol), rank_tol)));
      }
  return r;
}

// Spin-1/2 projector subspace [S_n(sign)] = (I + sign n.sigma)/2 for a unit axis n.
inline Subspace spin_half_subspace(double nx, double ny, double nz, int sign) {
  const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (len <= tol::zero) throw ValidationError("spin_half_subspace: zero axis");
  if (sign != 1 && sign != -1) throw ValidationError("spin_half_subspace: sign must be +-1");
  nx /= len;
  ny /= len;
  nz /= len;
  CMatrix p(2, 2);
  const double s = static_cast<double>(sign);
  p(0, 0) = 0.5 * (1.0 + s * nz);
  p(0, 1) = 0.5 * s * Complex(nx, -ny);
  p(1, 0) = 0.5 * s * Complex(nx, ny);
  p(1, 1) = 0.5 * (1.0 - s * nz);
  return Subspace::from_projector(Projector(std::move(p)));
}

}  // namespace cqt
