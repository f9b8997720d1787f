#pragma once

// Families of histories: per-time sample spaces over ordered times with a
// state fixed at t0, Heisenberg projectors, chain operators, the extended
// Born rule, the decoherence functional with its weak/medium classification,
// conditional measures and the recursion they satisfy.

#include <optional>
#include <span>
#include <vector>

#include "cqt/random.hpp"
#include "cqt/static_cqt.hpp"

namespace cqt {

// Member selection per time, 0-based. User-facing text is 1-based.
struct HistoryIndex {
  std::vector<int> j;

  friend bool operator==(const HistoryIndex& a, const HistoryIndex& b) { return a.j == b.j; }
  friend auto operator<=>(const HistoryIndex& a, const HistoryIndex& b) { return a.j <=> b.j; }
};

class Family {
 public:
  Family(double t0, StateDensity state, Hamiltonian hamiltonian, std::vector<double> times,
         std::vector<SampleSpace> spaces)
      : t0_(t0),
        state_(std::move(state)),
        hamiltonian_(std::move(hamiltonian)),
        times_(std::move(times)),
        spaces_(std::move(spaces)) {
    const Eigen::Index d = state_.dim();
    if (hamiltonian_.dim() != d) throw DimensionError("Family: Hamiltonian dimension mismatch");
    if (times_.empty()) throw ValidationError("Family: need at least one projection time");
    if (times_.size() != spaces_.size())
      throw ValidationError("Family: one sample space per time required");
    double prev = t0_;
    for (double t : times_) {
      if (!(t > prev)) throw ValidationError("Family: times must be strictly increasing after t0");
      prev = t;
    }
    for (const SampleSpace& s : spaces_)
      if (s.ambient_dim() != d) throw DimensionError("Family: sample space dimension mismatch");

    // Heisenberg projectors are fixed by the family; build them eagerly so
    // the value is immutable and safe to share across threads.
    heisenberg_.resize(times_.size());
    for (std::size_t n = 0; n < times_.size(); ++n) {
      const CMatrix u = propagator(hamiltonian_, times_[n], t0_);
      const CMatrix u_dag = u.adjoint();
      heisenberg_[n].reserve(static_cast<std::size_t>(spaces_[n].size()));
      for (int j = 0; j < spaces_[n].size(); ++j)
        heisenberg_[n].emplace_back(u_dag * spaces_[n].member(j).projector_matrix() * u);
    }
  }

  Eigen::Index dim() const { return state_.dim(); }
  double t0() const { return t0_; }
  const StateDensity& state() const { return state_; }
  const Hamiltonian& hamiltonian() const { return hamiltonian_; }
  int num_times() const { return static_cast<int>(times_.size()); }
  double time(int n) const { return times_.at(static_cast<std::size_t>(n)); }
  const std::vector<double>& times() const { return times_; }
  const SampleSpace& space(int n) const { return spaces_.at(static_cast<std::size_t>(n)); }
  int members_at(int n) const { return space(n).size(); }

  std::size_t elementary_count() const {
    std::size_t m = 1;
    for (const SampleSpace& s : spaces_) m *= static_cast<std::size_t>(s.size());
    return m;
  }

  // A_bar(n, j) = U(t_n, t0)^-1 [A_n^j] U(t_n, t0); a projector again.
  const CMatrix& heisenberg_projector_matrix(int n, int j) const {
    check_index(n, j);
    return heisenberg_[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
  }

  Projector heisenberg_projector(int n, int j) const {
    return Projector(heisenberg_projector_matrix(n, j));
  }

  void check_index(int n, int j) const {
    if (n < 0 || n >= num_times()) throw DimensionError("Family: time index out of range");
    if (j < 0 || j >= members_at(n)) throw DimensionError("Family: member index out of range");
  }

  void check_history(const HistoryIndex& h) const {
    if (static_cast<int>(h.j.size()) != num_times())
      throw DimensionError("Family: history length mismatch");
    for (int n = 0; n < num_times(); ++n) check_index(n, h.j[static_cast<std::size_t>(n)]);
  }

  // Histories enumerate in mixed radix with the first time most significant.
  HistoryIndex history_at(std::size_t flat) const {
    HistoryIndex h;
    h.j.assign(static_cast<std::size_t>(num_times()), 0);
    for (int n = num_times() - 1; n >= 0; --n) {
      const std::size_t m = static_cast<std::size_t>(members_at(n));
      h.j[static_cast<std::size_t>(n)] = static_cast<int>(flat % m);
      flat /= m;
    }
    if (flat != 0) throw DimensionError("Family: flat history index out of range");
    return h;
  }

  std::size_t flat_index(const HistoryIndex& h) const {
    check_history(h);
    std::size_t flat = 0;
    for (int n = 0; n < num_times(); ++n)
      flat = flat * static_cast<std::size_t>(members_at(n)) +
             static_cast<std::size_t>(h.j[static_cast<std::size_t>(n)]);
    return flat;
  }

 private:
  double t0_;
  StateDensity state_;
  Hamiltonian hamiltonian_;
  std::vector<double> times_;
  std::vector<SampleSpace> spaces_;
  std::vector<std::vector<CMatrix>> heisenberg_;
};

// Chain operator C_hat = A_bar_N ... A_bar_1, latest factor leftmost.
// Generally not a projector.
inline CMatrix chain_operator(const Family& fam, const HistoryIndex& h) {
  fam.check_history(h);
  CMatrix c = fam.heisenberg_projector_matrix(0, h.j[0]);
  for (int n = 1; n < fam.num_times(); ++n)
    c = fam.heisenberg_projector_matrix(n, h.j[static_cast<std::size_t>(n)]) * c;
  return c;
}

// Chain operator of a homogeneous event: each factor is the sum of the
// selected members' Heisenberg projectors at that time.
inline CMatrix homogeneous_chain(const Family& fam, const std::vector<std::vector<int>>& masks) {
  if (static_cast<int>(masks.size()) != fam.num_times())
    throw DimensionError("homogeneous_chain: one member list per time required");
  const Eigen::Index d = fam.dim();
  CMatrix c = CMatrix::Identity(d, d);
  for (int n = 0; n < fam.num_times(); ++n) {
    if (masks[static_cast<std::size_t>(n)].empty())
      throw ValidationError("homogeneous_chain: empty member list");
    CMatrix factor = CMatrix::Zero(d, d);
    for (int j : masks[static_cast<std::size_t>(n)]) factor += fam.heisenberg_projector_matrix(n, j);
    c = factor * c;
  }
  return c;
}

// D(h1, h2) = Tr(rho0 C2^dagger C1); for a pure state this is
// <psi0| C2^dagger C1 |psi0>. The diagonal is the Born probability.
inline Complex decoherence_functional(const Family& fam, const HistoryIndex& h1,
                                      const HistoryIndex& h2) {
  const CMatrix c1 = chain_operator(fam, h1);
  const CMatrix c2 = chain_operator(fam, h2);
  return (fam.state().matrix() * c2.adjoint() * c1).trace();
}

inline double born_probability(const Family& fam, const HistoryIndex& h) {
  const CMatrix c = chain_operator(fam, h);
  const double p = (fam.state().matrix() * c.adjoint() * c).trace().real();
  return std::clamp(p, 0.0, 1.0);
}

enum class Verdict { MediumConsistent, WeakOnly, Inconsistent };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::MediumConsistent: return "MediumConsistent";
    case Verdict::WeakOnly: return "WeakOnly";
    case Verdict::Inconsistent: return "Inconsistent";
  }
  return "?";
}

struct WorstPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double magnitude = 0.0;  // |D| at the worst off-diagonal pair
};

struct DecoherenceReport {
  CMatrix D;                       // M x M, Hermitian
  Verdict verdict = Verdict::MediumConsistent;
  WorstPair worst_offdiag;
  Eigen::VectorXd probabilities;   // diagonal of D, clamped

  double offdiag_max() const { return worst_offdiag.magnitude; }
};

// Builds the full decoherence matrix. MediumConsistent iff every off-diagonal
// |D| is within tol_dec; WeakOnly iff only the real parts are; otherwise
// Inconsistent. The tolerance is absolute: D entries are bounded by 1.
inline DecoherenceReport classify(const Family& fam, double tol_dec = tol::dec,
                                  std::size_t max_histories = 64) {
  const std::size_t m = fam.elementary_count();
  if (m > max_histories)
    throw CapExceededError(
        "classify: too many elementary histories; coarsen the family or raise the cap");

  std::vector<CMatrix> chains(m);
  for (std::size_t i = 0; i < m; ++i) chains[i] = chain_operator(fam, fam.history_at(i));

  DecoherenceReport report;
  report.D.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  const CMatrix& rho = fam.state().matrix();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k <= i; ++k) {
      const Complex d = (rho * chains[k].adjoint() * chains[i]).trace();
      report.D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = d;
      report.D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = std::conj(d);
    }

  report.probabilities.resize(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i)
    report.probabilities(static_cast<Eigen::Index>(i)) =
        std::clamp(report.D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real(),
                   0.0, 1.0);

  double abs_max = 0.0;
  double re_max = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i + 1; k < m; ++k) {
      const Complex d = report.D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
      if (std::abs(d) > abs_max) {
        abs_max = std::abs(d);
        report.worst_offdiag = {i, k, abs_max};
      }
      re_max = std::max(re_max, std::abs(d.real()));
    }

  if (abs_max <= tol_dec) report.verdict = Verdict::MediumConsistent;
  else if (re_max <= tol_dec) report.verdict = Verdict::WeakOnly;
  else report.verdict = Verdict::Inconsistent;
  return report;
}

// A dynamic event: a set of elementary histories of one family. Homogeneous
// events factor into one static event per time.
class DynamicEvent {
 public:
  DynamicEvent(const Family& fam, std::vector<HistoryIndex> elements)
      : fam_(&fam), elems_(std::move(elements)) {
    for (const HistoryIndex& h : elems_) fam.check_history(h);
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
  }

  static DynamicEvent null_event(const Family& fam) { return DynamicEvent(fam, {}); }

  static DynamicEvent full_event(const Family& fam) {
    std::vector<HistoryIndex> all;
    const std::size_t m = fam.elementary_count();
    all.reserve(m);
    for (std::size_t i = 0; i < m; ++i) all.push_back(fam.history_at(i));
    return DynamicEvent(fam, std::move(all));
  }

  const Family& family() const { return *fam_; }
  bool empty() const { return elems_.empty(); }
  std::size_t size() const { return elems_.size(); }
  const std::vector<HistoryIndex>& elements() const { return elems_; }

  // Per-time member masks iff the element set equals the Cartesian product of
  // its per-time projections; otherwise nothing (the event is inhomogeneous).
  std::optional<std::vector<std::vector<int>>> homogeneous_masks() const {
    if (elems_.empty()) return std::nullopt;
    const int n_times = fam_->num_times();
    std::vector<std::vector<int>> masks(static_cast<std::size_t>(n_times));
    for (int n = 0; n < n_times; ++n) {
      std::vector<bool> seen(static_cast<std::size_t>(fam_->members_at(n)), false);
      for (const HistoryIndex& h : elems_) seen[static_cast<std::size_t>(h.j[static_cast<std::size_t>(n)])] = true;
      for (int j = 0; j < fam_->members_at(n); ++j)
        if (seen[static_cast<std::size_t>(j)]) masks[static_cast<std::size_t>(n)].push_back(j);
    }
    // Every element's n-th index lies in the n-th projection, so the set is
    // contained in the product; equality is then a cardinality check.
    std::size_t product = 1;
    for (const auto& m : masks) product *= m.size();
    if (product != elems_.size()) return std::nullopt;
    return masks;
  }

 private:
  const Family* fam_;
  std::vector<HistoryIndex> elems_;
};

inline std::optional<std::vector<std::vector<int>>> is_homogeneous(const DynamicEvent& e) {
  return e.homogeneous_masks();
}

// Probability of a compound event: the sum of its elementary probabilities.
// Defined only for frameworks, i.e. medium-consistent families; otherwise the
// two evaluation routes disagree and the request is refused.
inline double event_probability(const Family& fam, const DynamicEvent& e,
                                const DecoherenceReport& report) {
  if (&e.family() != &fam) throw ValidationError("event_probability: event from another family");
  if (report.verdict != Verdict::MediumConsistent)
    throw InconsistentFamilyError(
        "event_probability: family is not a framework (medium decoherence fails); "
        "compound probabilities are undefined");
  double p = 0.0;
  for (const HistoryIndex& h : e.elements())
    p += report.probabilities(static_cast<Eigen::Index>(fam.flat_index(h)));
  return std::clamp(p, 0.0, 1.0);
}

// Z_{C_bar_n}(B) = Tr(rho0 C_n^dag B C_n) / Tr(rho0 C_n^dag C_n) for the
// prefix of length n; n = 0 gives W_0(B) = Tr(rho0 B).
inline double conditional_measure(const Family& fam, std::span<const int> prefix,
                                  const Projector& b, double zero_tol = tol::zero) {
  if (static_cast<int>(prefix.size()) > fam.num_times())
    throw DimensionError("conditional_measure: prefix longer than the family");
  if (b.dim() != fam.dim()) throw DimensionError("conditional_measure: projector dimension");
  const Eigen::Index d = fam.dim();
  CMatrix c = CMatrix::Identity(d, d);
  for (std::size_t n = 0; n < prefix.size(); ++n)
    c = fam.heisenberg_projector_matrix(static_cast<int>(n), prefix[n]) * c;
  const CMatrix& rho = fam.state().matrix();
  const double denom = (rho * c.adjoint() * c).trace().real();
  if (denom <= zero_tol)
    throw ZeroProbabilityError("conditional_measure: prehistory has (near-)zero probability");
  const double num = (rho * c.adjoint() * b.matrix() * c).trace().real();
  return std::clamp(num / denom, 0.0, 1.0);
}

// Probability of the length-n prefix of a history, Tr(rho0 C_n^dag C_n).
inline double prefix_probability(const Family& fam, const HistoryIndex& h, int n) {
  fam.check_history(h);
  if (n < 0 || n > fam.num_times())
    throw DimensionError("prefix_probability: prefix length out of range");
  const Eigen::Index d = fam.dim();
  CMatrix c = CMatrix::Identity(d, d);
  for (int k = 0; k < n; ++k)
    c = fam.heisenberg_projector_matrix(k, h.j[static_cast<std::size_t>(k)]) * c;
  return (fam.state().matrix() * c.adjoint() * c).trace().real();
}

struct RecursionReport {
  double max_recursion_residual = 0.0;  // Z_{C_n}(B) vs Z_{C_{n-1}}(B)/Z_{C_{n-1}}(A_bar_n)
  double telescoping_residual = 0.0;    // product of conditionals vs chain formula
  int trials_run = 0;
  int trials_skipped = 0;               // low-probability prefixes
  bool telescoping_skipped = false;

  bool pass(double recursion_tol = 1e-9, double telescoping_tol = 1e-10) const {
    return max_recursion_residual <= recursion_tol &&
           (telescoping_skipped || telescoping_residual <= telescoping_tol);
  }
};

// Checks the conditional-measure recursion on random projectors B <= A_bar_n
// built inside the range of A_bar_n, and the telescoping identity that the
// product of conditionals times P1 reproduces the Born probability.
inline RecursionReport verify_recursion(const Family& fam, const HistoryIndex& h, int trials,
                                        Rng& rng, double prefix_floor = 1e-6) {
  fam.check_history(h);
  RecursionReport report;
  const int n_times = fam.num_times();

  auto prefix_of = [&](int n) { return std::span<const int>(h.j.data(), static_cast<std::size_t>(n)); };

  // Part (a): the recursion of the conditional measures.
  if (n_times >= 2) {
    std::uniform_int_distribution<int> pick_n(1, n_times - 1);
    for (int trial = 0; trial < trials; ++trial) {
      const int n = pick_n(rng);
      const CMatrix& abar = fam.heisenberg_projector_matrix(n, h.j[static_cast<std::size_t>(n)]);
      // Random projector inside the range of A_bar_n.
      const HermitianEig eig = hermitian_eig(abar);
      std::vector<Ket> range;
      for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k)
        if (eig.eigenvalues(k) > 0.5) range.push_back(eig.eigenvectors.col(k));
      const Eigen::Index r = static_cast<Eigen::Index>(range.size());
      if (r == 0) {
        ++report.trials_skipped;
        continue;
      }
      CMatrix q(fam.dim(), r);
      for (Eigen::Index k = 0; k < r; ++k) q.col(k) = range[static_cast<std::size_t>(k)];
      std::uniform_int_distribution<Eigen::Index> pick_rank(1, r);
      const CMatrix small = random_projector_matrix(r, pick_rank(rng), rng);
      const Projector b(q * small * q.adjoint());

      if (prefix_probability(fam, h, n) <= prefix_floor) {
        ++report.trials_skipped;
        continue;
      }
      const double z_prev_a = conditional_measure(fam, prefix_of(n - 1), Projector(abar));
      const double z_n = conditional_measure(fam, prefix_of(n), b);
      const double z_prev_b = conditional_measure(fam, prefix_of(n - 1), b);
      const double residual = std::abs(z_n - z_prev_b / z_prev_a);
      report.max_recursion_residual = std::max(report.max_recursion_residual, residual);
      ++report.trials_run;
    }
  }

  // Part (b): telescoping product of conditionals against the chain formula.
  try {
    double product = conditional_measure(fam, prefix_of(0),
                                         fam.heisenberg_projector(0, h.j[0]));  // P1
    for (int n = 1; n < n_times; ++n)
      product *= conditional_measure(fam, prefix_of(n),
                                     fam.heisenberg_projector(n, h.j[static_cast<std::size_t>(n)]));
    report.telescoping_residual = std::abs(product - born_probability(fam, h));
  } catch (const ZeroProbabilityError&) {
    report.telescoping_skipped = true;
  }
  return report;
}

}  // namespace cqt
