#pragma once

// Static theory: sample spaces (orthogonal decompositions of the identity),
// the Boolean frameworks they close into, density matrices, the Born lattice
// measure, framework probability functions, noncontextuality checks and
// pure-state truth values.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "cqt/lattice.hpp"
#include "cqt/random.hpp"

namespace cqt {

class StateDensity {
 public:
  static StateDensity pure(const Ket& psi, double norm_tol = tol::norm) {
    if (psi.size() < 1) throw DimensionError("StateDensity::pure: empty ket");
    if (!is_normalized(psi, norm_tol))
      throw ValidationError("StateDensity::pure: ket is not normalized");
    StateDensity s(psi * psi.adjoint());
    s.ket_ = psi;
    return s;
  }

  static StateDensity mixed(CMatrix rho, double psd_tol = tol::psd,
                            double trace_tol = tol::trace, double herm_tol = tol::herm) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
      throw DimensionError("StateDensity::mixed: matrix must be square and nonempty");
    require_finite(rho, "StateDensity");
    if (!is_hermitian(rho, herm_tol))
      throw ValidationError("StateDensity::mixed: matrix is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol)
      throw ValidationError("StateDensity::mixed: trace is not 1");
    const HermitianEig eig = hermitian_eig(rho, herm_tol);
    if (eig.eigenvalues.minCoeff() < -psd_tol)
      throw ValidationError("StateDensity::mixed: matrix is not positive semidefinite");
    return StateDensity(std::move(rho));
  }

  static StateDensity maximally_mixed(Eigen::Index dim) {
    return StateDensity(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

  // Present iff the value was built from a ket.
  const std::optional<Ket>& ket() const { return ket_; }

 private:
  explicit StateDensity(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
  std::optional<Ket> ket_;
};

// Events of a framework are subsets of its atoms, stored as bit masks.
using EventMask = std::uint64_t;

inline constexpr int max_atoms = 64;        // masks are 64-bit
inline constexpr int enumeration_cap = 20;  // 2^m closure materialized only below this

class SampleSpace {
 public:
  // Checks pairwise orthogonality and completeness, reporting the first
  // offending pair or the completeness residual.
  static SampleSpace validate(std::vector<Subspace> members, double proj_tol = tol::proj,
                              double comm_tol = tol::comm) {
    if (members.empty()) throw ValidationError("SampleSpace: no members");
    const Eigen::Index d = members.front().ambient_dim();
    if (static_cast<int>(members.size()) > max_atoms)
      throw CapExceededError("SampleSpace: more than 64 members");
    CMatrix sum = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].ambient_dim() != d)
        throw DimensionError("SampleSpace: mixed ambient dimensions");
      if (members[i].is_zero()) {
        std::ostringstream msg;
        msg << "SampleSpace: member " << i + 1 << " is the zero subspace";
        throw ValidationError(msg.str());
      }
      sum += members[i].projector_matrix();
      for (std::size_t k = 0; k < i; ++k) {
        const double overlap =
            max_abs(members[k].projector_matrix() * members[i].projector_matrix());
        if (overlap > comm_tol) {
          std::ostringstream msg;
          msg << "SampleSpace: members " << k + 1 << " and " << i + 1
              << " are not orthogonal (overlap " << overlap << ")";
          throw ValidationError(msg.str());
        }
      }
    }
    const double completeness = max_abs(sum - CMatrix::Identity(d, d));
    if (completeness > proj_tol) {
      std::ostringstream msg;
      msg << "SampleSpace: members do not resolve the identity (residual " << completeness << ")";
      throw ValidationError(msg.str());
    }
    return SampleSpace(std::move(members));
  }

  Eigen::Index ambient_dim() const { return members_.front().ambient_dim(); }
  int size() const { return static_cast<int>(members_.size()); }
  const Subspace& member(int i) const { return members_.at(static_cast<std::size_t>(i)); }
  const std::vector<Subspace>& members() const { return members_; }

 private:
  explicit SampleSpace(std::vector<Subspace> members) : members_(std::move(members)) {}
  std::vector<Subspace> members_;
};

// The Boolean event algebra generated by a sample space. Events are index
// masks; projectors are materialized on demand, so the 2^m closure is never
// stored.
class FrameworkStatic {
 public:
  explicit FrameworkStatic(SampleSpace base) : base_(std::move(base)) {}

  const SampleSpace& base() const { return base_; }
  Eigen::Index ambient_dim() const { return base_.ambient_dim(); }
  int atom_count() const { return base_.size(); }

  EventMask full_mask() const {
    return atom_count() == max_atoms ? ~EventMask{0} : ((EventMask{1} << atom_count()) - 1);
  }

  void require_mask(EventMask mask) const {
    if (mask & ~full_mask()) throw DimensionError("FrameworkStatic: mask indexes missing atoms");
  }

  // [E_J] = sum of the atom projectors selected by the mask.
  CMatrix event_projector_matrix(EventMask mask) const {
    require_mask(mask);
    const Eigen::Index d = ambient_dim();
    CMatrix p = CMatrix::Zero(d, d);
    for (int i = 0; i < atom_count(); ++i)
      if (mask & (EventMask{1} << i)) p += base_.member(i).projector_matrix();
    return p;
  }

  Projector event_projector(EventMask mask) const {
    return Projector(event_projector_matrix(mask));
  }

  Subspace event_subspace(EventMask mask) const {
    return Subspace::from_projector(event_projector(mask));
  }

  std::vector<EventMask> all_masks() const {
    if (atom_count() > enumeration_cap)
      throw CapExceededError("FrameworkStatic: event closure too large to enumerate");
    std::vector<EventMask> masks(static_cast<std::size_t>(1) << atom_count());
    for (std::size_t m = 0; m < masks.size(); ++m) masks[m] = static_cast<EventMask>(m);
    return masks;
  }

 private:
  SampleSpace base_;
};

inline void require_same_dim(const StateDensity& rho, Eigen::Index d, const char* op) {
  if (rho.dim() != d) throw DimensionError(std::string(op) + ": state dimension mismatch");
}

// W_rho(A) = Tr(rho [A]), clamped onto [0, 1].
inline double lattice_measure(const StateDensity& rho, const CMatrix& projector_matrix) {
  if (rho.dim() != projector_matrix.rows())
    throw DimensionError("lattice_measure: dimension mismatch");
  const double w = (rho.matrix() * projector_matrix).trace().real();
  return std::clamp(w, 0.0, 1.0);
}

inline double lattice_measure(const StateDensity& rho, const Subspace& a) {
  return lattice_measure(rho, a.projector_matrix());
}

inline double lattice_measure(const StateDensity& rho, const Projector& p) {
  return lattice_measure(rho, p.matrix());
}

// The restriction of W_rho to one framework: a classical probability function
// on atom subsets. Atom values are computed once; events sum them.
class ProbabilityFunction {
 public:
  ProbabilityFunction(const StateDensity& rho, const FrameworkStatic& fw)
      : atom_count_(fw.atom_count()) {
    require_same_dim(rho, fw.ambient_dim(), "probability_function");
    atom_.reserve(atom_count_);
    for (int i = 0; i < atom_count_; ++i)
      atom_.push_back(lattice_measure(rho, fw.base().member(i)));
  }

  int atom_count() const { return atom_count_; }
  double atom(int i) const { return atom_.at(static_cast<std::size_t>(i)); }
  const std::vector<double>& atom_probabilities() const { return atom_; }

  double operator()(EventMask mask) const {
    double p = 0.0;
    for (int i = 0; i < atom_count_; ++i)
      if (mask & (EventMask{1} << i)) p += atom_[static_cast<std::size_t>(i)];
    return p;
  }

  std::map<EventMask, double> as_map() const {
    if (atom_count_ > enumeration_cap)
      throw CapExceededError("ProbabilityFunction: event closure too large to enumerate");
    std::map<EventMask, double> out;
    const EventMask top = EventMask{1} << atom_count_;
    for (EventMask m = 0; m < top; ++m) out[m] = (*this)(m);
    return out;
  }

 private:
  int atom_count_;
  std::vector<double> atom_;
};

inline ProbabilityFunction probability_function(const StateDensity& rho,
                                                const FrameworkStatic& fw) {
  return ProbabilityFunction(rho, fw);
}

struct SharedEvent {
  EventMask mask1 = 0;
  EventMask mask2 = 0;
  double p1 = 0.0;
  double p2 = 0.0;
};

struct NoncontextualityReport {
  std::vector<SharedEvent> shared;
  double max_deviation = 0.0;
  bool exhaustive = true;  // false when masks were sampled instead of enumerated
};

namespace detail {

// Deterministic Hermitian probe used to fingerprint event projectors, so
// matching is a sort instead of an all-pairs projector comparison.
inline CMatrix random_hermitian_probe(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(n(rng), n(rng));
  return 0.5 * (g + g.adjoint());
}

}  // namespace detail

// Enumerates (or samples, above the cap) the events of both frameworks and
// matches them by projector distance; reports the worst probability-value
// disagreement over shared events. Theorem B4 says it should vanish.
inline NoncontextualityReport noncontextuality_check(const StateDensity& rho,
                                                     const FrameworkStatic& fw1,
                                                     const FrameworkStatic& fw2,
                                                     double match_tol = tol::proj,
                                                     std::size_t sample_cap = 4096) {
  if (fw1.ambient_dim() != fw2.ambient_dim())
    throw DimensionError("noncontextuality_check: ambient dimensions differ");
  NoncontextualityReport report;

  auto masks_of = [&](const FrameworkStatic& fw) {
    std::vector<EventMask> masks;
    if (fw.atom_count() <= enumeration_cap &&
        (static_cast<std::size_t>(1) << fw.atom_count()) <= sample_cap) {
      masks = fw.all_masks();
    } else {
      report.exhaustive = false;
      Rng rng(0x9e3779b97f4a7c15ull);
      masks.push_back(0);
      masks.push_back(fw.full_mask());
      std::uniform_int_distribution<EventMask> dist(0, fw.full_mask());
      while (masks.size() < sample_cap) masks.push_back(dist(rng) & fw.full_mask());
    }
    return masks;
  };

  const Eigen::Index d = fw1.ambient_dim();
  Rng probe_rng(0x5eedull + static_cast<unsigned long long>(d));
  const CMatrix probe = detail::random_hermitian_probe(d, probe_rng);

  struct Tagged {
    double fingerprint;
    EventMask mask;
  };
  auto tag = [&](const FrameworkStatic& fw, const std::vector<EventMask>& masks) {
    std::vector<Tagged> out;
    out.reserve(masks.size());
    for (EventMask m : masks)
      out.push_back({(fw.event_projector_matrix(m) * probe).trace().real(), m});
    std::sort(out.begin(), out.end(),
              [](const Tagged& a, const Tagged& b) { return a.fingerprint < b.fingerprint; });
    return out;
  };

  const std::vector<Tagged> tagged1 = tag(fw1, masks_of(fw1));
  const std::vector<Tagged> tagged2 = tag(fw2, masks_of(fw2));

  const ProbabilityFunction p1(rho, fw1);
  const ProbabilityFunction p2(rho, fw2);

  // Fingerprints of equal projectors agree to rounding; scan the merged order
  // with a window wide enough to absorb the match tolerance.
  const double window = match_tol * static_cast<double>(d) * (1.0 + max_abs(probe)) * 4.0;
  std::size_t lo = 0;
  for (const Tagged& t1 : tagged1) {
    while (lo < tagged2.size() && tagged2[lo].fingerprint < t1.fingerprint - window) ++lo;
    for (std::size_t k = lo; k < tagged2.size(); ++k) {
      if (tagged2[k].fingerprint > t1.fingerprint + window) break;
      const double dist = max_abs(fw1.event_projector_matrix(t1.mask) -
                                  fw2.event_projector_matrix(tagged2[k].mask));
      if (dist <= match_tol) {
        SharedEvent ev;
        ev.mask1 = t1.mask;
        ev.mask2 = tagged2[k].mask;
        ev.p1 = p1(t1.mask);
        ev.p2 = p2(tagged2[k].mask);
        report.max_deviation = std::max(report.max_deviation, std::abs(ev.p1 - ev.p2));
        report.shared.push_back(ev);
      }
    }
  }
  return report;
}

enum class TruthValue { True, False, Indeterminate };

// Truth values for a pure state: probability 1 within prob_tol is True,
// probability 0 is False, anything else is Indeterminate.
inline std::map<EventMask, TruthValue> pure_truth_values(const Ket& psi,
                                                         const FrameworkStatic& fw,
                                                         double prob_tol = tol::prob) {
  if (!is_normalized(psi)) throw ValidationError("pure_truth_values: ket is not normalized");
  const ProbabilityFunction p(StateDensity::pure(psi), fw);
  std::map<EventMask, TruthValue> out;
  for (EventMask mask : fw.all_masks()) {
    const double v = p(mask);
    if (v >= 1.0 - prob_tol) out[mask] = TruthValue::True;
    else if (v <= prob_tol) out[mask] = TruthValue::False;
    else out[mask] = TruthValue::Indeterminate;
  }
  return out;
}

}  // namespace cqt
