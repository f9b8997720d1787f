#pragma once

// Independent verifiers and demonstrators: the Cassinelli-Zanghi quotient
// measure theorem, the Diosi product argument separating weak from medium
// decoherence, the Peres-Mermin parity no-go, the canonical two-slit families
// and a collapse-sequence probability oracle for cross-checking chains.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cqt/histories.hpp"

namespace cqt {

// ---------------------------------------------------------------------------
// CZ theorem: W(B) = V~(A B A) / V(A) is the unique normalized lattice
// measure agreeing with V(B)/V(A) below A.

struct CZInstance {
  StateDensity rho;   // generates V~(J) = Tr(rho J)
  Projector a_hat;

  CZInstance(StateDensity rho_in, Projector a_in, double min_va = 1e-9)
      : rho(std::move(rho_in)), a_hat(std::move(a_in)) {
    if (rho.dim() != a_hat.dim()) throw DimensionError("CZInstance: dimension mismatch");
    if (v_of_a() <= min_va)
      throw ValidationError("CZInstance: V(A) is (near-)zero, the quotient is undefined");
  }

  double v_of_a() const { return (rho.matrix() * a_hat.matrix()).trace().real(); }

  // V~ on arbitrary operators; its restriction to projectors is V.
  Complex v_tilde(const CMatrix& j) const { return (rho.matrix() * j).trace(); }

  // The quotient measure of the theorem.
  double w(const CMatrix& b_projector) const {
    const CMatrix& a = a_hat.matrix();
    return v_tilde(a * b_projector * a).real() / v_of_a();
  }
};

struct CZCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CZReport {
  std::vector<CZCheck> checks;
  bool pass = true;

  void add(std::string name, double residual, double tolerance) {
    checks.push_back({std::move(name), residual, tolerance, residual <= tolerance});
    pass = pass && checks.back().pass;
  }
};

// Random orthogonal decomposition of the identity from a Haar-like unitary.
inline std::vector<CMatrix> random_decomposition(Eigen::Index dim, Rng& rng) {
  const CMatrix u = random_unitary(dim, rng);
  std::uniform_int_distribution<int> pick(1, static_cast<int>(dim));
  std::vector<CMatrix> parts;
  Eigen::Index used = 0;
  while (used < dim) {
    const Eigen::Index take = std::min<Eigen::Index>(pick(rng), dim - used);
    const CMatrix block = u.middleCols(used, take);
    parts.push_back(block * block.adjoint());
    used += take;
  }
  return parts;
}

inline CZReport cz_check(const CZInstance& inst, int trials, Rng& rng) {
  CZReport report;
  const Eigen::Index d = inst.rho.dim();
  const CMatrix identity = CMatrix::Identity(d, d);
  const CMatrix& a = inst.a_hat.matrix();

  // (a) W is a normalized lattice measure.
  report.add("normalization W(I)=1", std::abs(inst.w(identity) - 1.0), 1e-12);
  double additivity = 0.0;
  double nonneg = 0.0;
  for (int t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (const CMatrix& p : random_decomposition(d, rng)) {
      const double w = inst.w(p);
      sum += w;
      nonneg = std::max(nonneg, -w);
    }
    additivity = std::max(additivity, std::abs(sum - 1.0));
  }
  report.add("additivity over random decompositions", additivity, 1e-9);
  report.add("nonnegativity", nonneg, 1e-12);

  // (b) The quotient relation below A: W(B) = V(B)/V(A), exact algebra since
  // A B A = B whenever B <= A.
  const HermitianEig a_eig = hermitian_eig(a);
  std::vector<Ket> range;
  for (Eigen::Index k = 0; k < a_eig.eigenvalues.size(); ++k)
    if (a_eig.eigenvalues(k) > 0.5) range.push_back(a_eig.eigenvectors.col(k));
  const Eigen::Index r = static_cast<Eigen::Index>(range.size());
  CMatrix q(d, r);
  for (Eigen::Index k = 0; k < r; ++k) q.col(k) = range[static_cast<std::size_t>(k)];
  double quotient = 0.0;
  std::uniform_int_distribution<Eigen::Index> pick_rank(1, r);
  for (int t = 0; t < trials; ++t) {
    const CMatrix b = q * random_projector_matrix(r, pick_rank(rng), rng) * q.adjoint();
    const double lhs = inst.w(b);
    const double rhs = inst.v_tilde(b).real() / inst.v_of_a();
    quotient = std::max(quotient, std::abs(lhs - rhs));
  }
  report.add("quotient W(B)=V(B)/V(A) for B<=A", quotient, 1e-12);

  // (c) The spectral path: A B A = sum_i lambda_i P_i and
  // sum_{lambda_i != 0} lambda_i V~(P_i) = V~(A B A).
  double spectral = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::uniform_int_distribution<Eigen::Index> pick_rank_b(1, d);
    const CMatrix b = random_projector_matrix(d, pick_rank_b(rng), rng);
    const CMatrix aba = a * b * a;
    double sum = 0.0;
    for (const SpectralComponent& c : spectral_projectors(aba))
      if (std::abs(c.eigenvalue) > tol::eig) sum += c.eigenvalue * inst.v_tilde(c.projector).real();
    spectral = std::max(spectral, std::abs(sum - inst.v_tilde(aba).real()));
  }
  report.add("spectral path sum(lambda_i V(P_i)) = V(ABA)", spectral, 1e-9);
  return report;
}

// ---------------------------------------------------------------------------
// Peres-Mermin no-go: +-1 assignments to a 3x3 grid of observables with
// product constraints. The standard square has none.

struct NoGoConstraint {
  std::vector<int> cells;  // indices into the row-major 3x3 grid
  int required = +1;       // +1 or -1
};

struct NoGoInstance {
  std::array<std::string, 9> observables;
  std::vector<NoGoConstraint> constraints;

  // Rows multiply to +I, columns to +I, +I, -I.
  static NoGoInstance peres_mermin() {
    NoGoInstance inst;
    inst.observables = {"X(x)I", "I(x)X", "X(x)X",
                        "I(x)Y", "Y(x)I", "Y(x)Y",
                        "X(x)Y", "Y(x)X", "Z(x)Z"};
    inst.constraints = {
        {{0, 1, 2}, +1}, {{3, 4, 5}, +1}, {{6, 7, 8}, +1},  // rows
        {{0, 3, 6}, +1}, {{1, 4, 7}, +1}, {{2, 5, 8}, -1},  // columns
    };
    return inst;
  }

  // The obstruction: every cell covered an even number of times while the
  // required products multiply to -1. No +-1 assignment can then satisfy all
  // constraints.
  bool parity_obstructed() const {
    std::array<int, 9> uses{};
    int product = 1;
    for (const NoGoConstraint& c : constraints) {
      product *= c.required;
      for (int cell : c.cells) uses.at(static_cast<std::size_t>(cell)) += 1;
    }
    for (int u : uses)
      if (u % 2 != 0) return false;
    return product == -1;
  }

  void validate() const {
    for (const NoGoConstraint& c : constraints) {
      if (c.required != 1 && c.required != -1)
        throw ValidationError("NoGoInstance: required product must be +-1");
      for (int cell : c.cells)
        if (cell < 0 || cell > 8) throw ValidationError("NoGoInstance: cell index out of range");
    }
  }
};

// Exhaustive count of satisfying +-1 assignments over the 2^9 grid values.
inline int mermin_no_go(const NoGoInstance& inst) {
  inst.validate();
  int satisfying = 0;
  for (int bits = 0; bits < 512; ++bits) {
    bool ok = true;
    for (const NoGoConstraint& c : inst.constraints) {
      int product = 1;
      for (int cell : c.cells) product *= (bits >> cell) & 1 ? -1 : 1;
      if (product != c.required) {
        ok = false;
        break;
      }
    }
    if (ok) ++satisfying;
  }
  return satisfying;
}

// ---------------------------------------------------------------------------
// Two-slit families.

// Without a marker: psi0 = (|L> + |R>)/sqrt(2), free dynamics, slit
// projectors at t1 and interference-basis projectors at t2. Inconsistent.
//
// With a marker: C^2 (x) C^2, where evolution up to t1 flips a marker spin
// iff the particle passes the left slit; the which-path record makes the
// family medium consistent. Between t1 and t2 the flip generator completes a
// full period, so the record persists through the interference analysis.
inline Family build_two_slit(bool with_marker) {
  if (!with_marker) {
    Ket left = Ket::Zero(2), right = Ket::Zero(2);
    left(0) = 1.0;
    right(1) = 1.0;
    const Ket plus = normalized(left + right);
    const Ket minus = normalized(left - right);
    const StateDensity psi0 = StateDensity::pure(plus);
    std::vector<SampleSpace> spaces = {
        SampleSpace::validate({Subspace::ray(left), Subspace::ray(right)}),
        SampleSpace::validate({Subspace::ray(plus), Subspace::ray(minus)}),
    };
    return Family(0.0, psi0, Hamiltonian::zero(2), {1.0, 2.0}, std::move(spaces));
  }

  // Path (x) marker, ordering kron(path, marker).
  const Eigen::Index d = 4;
  CMatrix proj_l = CMatrix::Zero(2, 2), proj_r = CMatrix::Zero(2, 2);
  proj_l(0, 0) = 1.0;
  proj_r(1, 1) = 1.0;
  CMatrix plus2(2, 1), minus2(2, 1);
  plus2 << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  minus2 << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  const CMatrix proj_plus = plus2 * plus2.adjoint();
  const CMatrix proj_minus = minus2 * minus2.adjoint();  // also the flip generator's target

  // H = pi [L] (x) [x-]: over one time unit it flips the marker conditioned
  // on the left path; over two more units it returns to the identity.
  const double pi = std::acos(-1.0);
  const Hamiltonian h(pi * kron(proj_l, proj_minus));

  Ket marker0 = Ket::Zero(2);
  marker0(0) = 1.0;
  Ket path_sup(2);
  path_sup << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Ket psi0(d);
  psi0 = kron(CMatrix(path_sup), CMatrix(marker0)).col(0);

  const CMatrix eye2 = CMatrix::Identity(2, 2);
  auto sub = [](const CMatrix& p) { return Subspace::from_projector(Projector(p)); };
  std::vector<SampleSpace> spaces = {
      SampleSpace::validate({sub(kron(proj_l, eye2)), sub(kron(proj_r, eye2))}),
      SampleSpace::validate({sub(kron(proj_plus, eye2)), sub(kron(proj_minus, eye2))}),
  };
  return Family(0.0, StateDensity::pure(psi0), h, {1.0, 3.0}, std::move(spaces));
}

// ---------------------------------------------------------------------------
// Collapse-sequence oracle: evolve the state vector, project, accumulate the
// conditional norm factors. Independent of the chain-operator path.

inline double brute_force_history_probability(const Family& fam, const HistoryIndex& h) {
  fam.check_history(h);
  if (!fam.state().ket())
    throw ValidationError("brute_force_history_probability: pure initial state required");
  Ket psi = *fam.state().ket();
  double probability = 1.0;
  double t_prev = fam.t0();
  for (int n = 0; n < fam.num_times(); ++n) {
    psi = propagator(fam.hamiltonian(), fam.time(n), t_prev) * psi;
    psi = fam.space(n).member(h.j[static_cast<std::size_t>(n)]).projector_matrix() * psi;
    const double p = psi.squaredNorm();
    if (p == 0.0) return 0.0;
    probability *= p;
    psi /= std::sqrt(p);
    t_prev = fam.time(n);
  }
  return probability;
}

// Schroedinger-picture chain [A_N] U(t_N, t_{N-1}) ... [A_1] U(t_1, t_0);
// equals U(t_N, t_0) times the Heisenberg chain, so decoherence functionals
// built from either agree.
inline CMatrix schrodinger_chain(const Family& fam, const HistoryIndex& h) {
  fam.check_history(h);
  const Eigen::Index d = fam.dim();
  CMatrix c = CMatrix::Identity(d, d);
  double t_prev = fam.t0();
  for (int n = 0; n < fam.num_times(); ++n) {
    c = propagator(fam.hamiltonian(), fam.time(n), t_prev) * c;
    c = fam.space(n).member(h.j[static_cast<std::size_t>(n)]).projector_matrix() * c;
    t_prev = fam.time(n);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Diosi product argument. For two unentangled subsystems the joint
// decoherence functional factorizes; medium decoherence survives the product
// while weak decoherence can fail, since Re(D1 D2) != Re(D1) Re(D2).

struct DiosiWitness {
  std::size_t h1 = 0, h1p = 0;  // flat indices in the first family
  std::size_t h2 = 0, h2p = 0;  // flat indices in the second family
  Complex d1, d2;
  double joint_re = 0.0;        // Re(D1 D2), the weak-decoherence violation
};

struct DiosiReport {
  double factorization_residual = 0.0;
  Verdict verdict1 = Verdict::MediumConsistent;
  Verdict verdict2 = Verdict::MediumConsistent;
  Verdict joint_verdict = Verdict::MediumConsistent;
  std::optional<DiosiWitness> witness;
};

// Joint family on the tensor product with state rho1 (x) rho2. Both
// subsystem families must share the projection time grid. A caller-supplied
// joint state must equal the product, else the argument does not apply.
inline DiosiReport diosi_check(const Family& f1, const Family& f2,
                               const std::optional<CMatrix>& joint_state = std::nullopt,
                               double tol_dec = tol::dec) {
  if (f1.num_times() != f2.num_times())
    throw ValidationError("diosi_check: subsystem families differ in length");
  if (f1.t0() != f2.t0())
    throw ValidationError("diosi_check: subsystem families must share t0");
  for (int n = 0; n < f1.num_times(); ++n)
    if (f1.time(n) != f2.time(n))
      throw ValidationError("diosi_check: subsystem families must share projection times");

  const CMatrix product_state = kron(f1.state().matrix(), f2.state().matrix());
  if (joint_state && max_abs(*joint_state - product_state) > tol::proj)
    throw ValidationError("diosi_check: joint state is entangled (not the product state)");

  const Hamiltonian joint_h(kron(f1.hamiltonian().matrix(),
                                 CMatrix::Identity(f2.dim(), f2.dim())) +
                            kron(CMatrix::Identity(f1.dim(), f1.dim()),
                                 f2.hamiltonian().matrix()));
  std::vector<SampleSpace> joint_spaces;
  for (int n = 0; n < f1.num_times(); ++n) {
    std::vector<Subspace> members;
    for (int i = 0; i < f1.members_at(n); ++i)
      for (int k = 0; k < f2.members_at(n); ++k)
        members.push_back(Subspace::from_projector(
            Projector(kron(f1.space(n).member(i).projector_matrix(),
                           f2.space(n).member(k).projector_matrix()))));
    joint_spaces.push_back(SampleSpace::validate(std::move(members)));
  }
  const Family joint(f1.t0(), StateDensity::mixed(product_state), joint_h, f1.times(),
                     std::move(joint_spaces));

  const std::size_t m1 = f1.elementary_count();
  const std::size_t m2 = f2.elementary_count();
  const DecoherenceReport r1 = classify(f1, tol_dec);
  const DecoherenceReport r2 = classify(f2, tol_dec);
  const DecoherenceReport rj = classify(joint, tol_dec, m1 * m2);

  DiosiReport report;
  report.verdict1 = r1.verdict;
  report.verdict2 = r2.verdict;
  report.joint_verdict = rj.verdict;

  // Joint histories interleave per-time pairs; map (a, b) to its flat index.
  auto joint_flat = [&](std::size_t a, std::size_t b) {
    const HistoryIndex ha = f1.history_at(a);
    const HistoryIndex hb = f2.history_at(b);
    HistoryIndex hj;
    hj.j.resize(ha.j.size());
    for (std::size_t n = 0; n < ha.j.size(); ++n)
      hj.j[n] = ha.j[n] * f2.members_at(static_cast<int>(n)) + hb.j[n];
    return joint.flat_index(hj);
  };

  for (std::size_t a = 0; a < m1; ++a)
    for (std::size_t ap = 0; ap < m1; ++ap)
      for (std::size_t b = 0; b < m2; ++b)
        for (std::size_t bp = 0; bp < m2; ++bp) {
          const Complex d1 = r1.D(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(ap));
          const Complex d2 = r2.D(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(bp));
          const Complex dj = rj.D(static_cast<Eigen::Index>(joint_flat(a, b)),
                                  static_cast<Eigen::Index>(joint_flat(ap, bp)));
          report.factorization_residual =
              std::max(report.factorization_residual, std::abs(dj - d1 * d2));
          // Witness: both factors weakly consistent, the product not.
          if ((a != ap || b != bp) && std::abs(d1.real()) <= tol_dec &&
              std::abs(d2.real()) <= tol_dec && std::abs((d1 * d2).real()) > tol_dec) {
            if (!report.witness || std::abs((d1 * d2).real()) > std::abs(report.witness->joint_re)) {
              DiosiWitness w;
              w.h1 = a;
              w.h1p = ap;
              w.h2 = b;
              w.h2p = bp;
              w.d1 = d1;
              w.d2 = d2;
              w.joint_re = (d1 * d2).real();
              report.witness = w;
            }
          }
        }
  return report;
}

// A weakly-but-not-medium consistent family: psi0 = |0>, x-basis projectors
// at t1, circular-basis projectors at t2. Off-diagonals come out at +-i/4.
inline Family diosi_witness_family() {
  Ket e0 = Ket::Zero(2), e1 = Ket::Zero(2);
  e0(0) = 1.0;
  e1(1) = 1.0;
  const Complex i(0.0, 1.0);
  const Ket xp = normalized(e0 + e1);
  const Ket xm = normalized(e0 - e1);
  const Ket yp = normalized(e0 + i * e1);
  const Ket ym = normalized(e0 - i * e1);
  std::vector<SampleSpace> spaces = {
      SampleSpace::validate({Subspace::ray(xp), Subspace::ray(xm)}),
      SampleSpace::validate({Subspace::ray(yp), Subspace::ray(ym)}),
  };
  return Family(0.0, StateDensity::pure(e0), Hamiltonian::zero(2), {1.0, 2.0},
                std::move(spaces));
}

}  // namespace cqt
