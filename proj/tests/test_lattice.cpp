#include <catch2/catch_amalgamated.hpp>

#include "cqt/lattice.hpp"
#include "cqt/random.hpp"

using namespace cqt;

namespace {

Ket basis_ket(Eigen::Index dim, Eigen::Index i) {
  Ket e = Ket::Zero(dim);
  e(i) = 1.0;
  return e;
}

Subspace random_subspace(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  return Subspace::from_projector(Projector(random_projector_matrix(dim, rank, rng)));
}

}  // namespace

TEST_CASE("q_meet is idempotent") {
  Rng rng(3);
  const Subspace a = random_subspace(4, 2, rng);
  CHECK(subspace_equal(q_meet(a, a), a));
}

TEST_CASE("q_meet of distinct rays in C^2 is the zero subspace") {
  const Subspace a = Subspace::ray(basis_ket(2, 0));
  Ket diag(2);
  diag << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const Subspace b = Subspace::ray(diag);
  const Subspace meet = q_meet(a, b);
  CHECK(meet.is_zero());
}

TEST_CASE("q_meet of coordinate planes in C^3 is the shared axis") {
  const Ket e1 = basis_ket(3, 0), e2 = basis_ket(3, 1), e3 = basis_ket(3, 2);
  const Subspace ab = Subspace::span_of({e1, e2});
  const Subspace bc = Subspace::span_of({e2, e3});
  const Subspace meet = q_meet(ab, bc);
  // Oracle: e2 lies in both operands and in the meet, and the meet is a ray.
  CHECK(max_abs(ab.projector_matrix() * e2 - e2) <= 1e-12);
  CHECK(max_abs(bc.projector_matrix() * e2 - e2) <= 1e-12);
  REQUIRE(meet.dim() == 1);
  CHECK(subspace_equal(meet, Subspace::ray(e2), 1e-10));
}

TEST_CASE("q_meet requires matching ambient dimensions") {
  const Subspace a = Subspace::ray(basis_ket(2, 0));
  const Subspace b = Subspace::ray(basis_ket(3, 0));
  CHECK_THROWS_AS(q_meet(a, b), DimensionError);
}

TEST_CASE("q_join with the zero subspace is the identity of the lattice bottom") {
  Rng rng(5);
  const Subspace a = random_subspace(3, 2, rng);
  CHECK(subspace_equal(q_join(a, Subspace::zero(3)), a));
}

TEST_CASE("q_join of the two coordinate rays fills C^2") {
  const Subspace joined = q_join(Subspace::ray(basis_ket(2, 0)), Subspace::ray(basis_ket(2, 1)));
  CHECK(joined.is_full());
}

TEST_CASE("A join its complement spans the space, random subspaces") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<Eigen::Index> pick_dim(1, 8);
    const Eigen::Index dim = pick_dim(rng);
    std::uniform_int_distribution<Eigen::Index> pick_rank(0, dim);
    const Subspace a = random_subspace(dim, pick_rank(rng), rng);
    CHECK(subspace_equal(q_join(a, q_not(a)), Subspace::full(dim), 1e-10));
    CHECK(subspace_equal(q_meet(a, q_not(a)), Subspace::zero(dim), 1e-10));
  }
}

TEST_CASE("q_not flips O and H and inverts coordinate rays") {
  CHECK(q_not(Subspace::zero(2)).is_full());
  CHECK(subspace_equal(q_not(Subspace::ray(basis_ket(2, 0))), Subspace::ray(basis_ket(2, 1))));
}

TEST_CASE("q_not is an involution") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Subspace a = random_subspace(5, 2, rng);
    CHECK(subspace_equal(q_not(q_not(a)), a, 1e-10));
  }
}

TEST_CASE("compatibility: self, spin-x vs spin-z, and orthogonal pairs") {
  const Subspace sz = spin_half_subspace(0, 0, 1, +1);
  const Subspace sx = spin_half_subspace(1, 0, 0, +1);
  CHECK(is_compatible(sz, sz));
  CHECK_FALSE(is_compatible(sz, sx));
  // Oracle: the commutator is +- i sigma_y / 2, largest entry 1/2.
  const CMatrix comm = sz.projector_matrix() * sx.projector_matrix() -
                       sx.projector_matrix() * sz.projector_matrix();
  CHECK(max_abs(comm) == Catch::Approx(0.5).margin(1e-12));
  CHECK(comm(0, 1).imag() == Catch::Approx(-0.5).margin(1e-12));
  // Orthogonal pair: both products vanish.
  CHECK(is_compatible(Subspace::ray(basis_ket(2, 0)), Subspace::ray(basis_ket(2, 1))));
}

TEST_CASE("ordering: A <= B iff meet(A, B) = A") {
  Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<Eigen::Index> pick_dim(2, 6);
    const Eigen::Index dim = pick_dim(rng);
    std::uniform_int_distribution<Eigen::Index> pick_rank(0, dim);
    Subspace a = random_subspace(dim, pick_rank(rng), rng);
    Subspace b = random_subspace(dim, pick_rank(rng), rng);
    // Sometimes force a genuine inclusion by meeting a with b.
    if (trial % 2 == 0) a = q_meet(a, b);
    const bool leq = q_leq(a, b);
    const bool via_meet = subspace_equal(q_meet(a, b), a, 1e-8);
    CHECK(leq == via_meet);
  }
}

TEST_CASE("orthogonality is symmetric and matches both product orders") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Subspace a = random_subspace(4, 1, rng);
    const Subspace b = random_subspace(4, 2, rng);
    const Subspace b_in_not_a = q_meet(b, q_not(a));
    CHECK(is_orthogonal(a, b) == is_orthogonal(b, a));
    if (!b_in_not_a.is_zero()) {
      CHECK(is_orthogonal(a, b_in_not_a));
      CHECK(is_orthogonal(b_in_not_a, a));
    }
  }
}

TEST_CASE("De Morgan duality on random subspaces") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<Eigen::Index> pick_dim(1, 8);
    const Eigen::Index dim = pick_dim(rng);
    std::uniform_int_distribution<Eigen::Index> pick_rank(0, dim);
    const Subspace a = random_subspace(dim, pick_rank(rng), rng);
    const Subspace b = random_subspace(dim, pick_rank(rng), rng);
    CHECK(subspace_equal(q_not(q_join(a, b)), q_meet(q_not(a), q_not(b)), 1e-9));
  }
}

TEST_CASE("ortholattice axioms hold on random samples while distributivity fails on coplanar rays") {
  Rng rng(47);
  std::vector<Subspace> sample;
  for (int k = 0; k < 3; ++k) sample.push_back(random_subspace(3, 1 + k % 2, rng));
  const OrtholatticeReport random_report = check_ortholattice_axioms(sample);
  CHECK(random_report.ortholattice_laws_hold(1e-9));

  // Three distinct coplanar rays: A meet (B join C) = A, but
  // (A meet B) join (A meet C) = O.
  Ket v0(2), v1(2), v2(2);
  v0 << 1.0, 0.0;
  v1 << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  v2 << 0.0, 1.0;
  const Subspace a = Subspace::ray(v0), b = Subspace::ray(v1), c = Subspace::ray(v2);
  const Subspace lhs = q_meet(a, q_join(b, c));
  const Subspace rhs = q_join(q_meet(a, b), q_meet(a, c));
  CHECK(subspace_equal(lhs, a));
  CHECK(rhs.is_zero());
  const OrtholatticeReport coplanar = check_ortholattice_axioms({a, b, c});
  CHECK(coplanar.ortholattice_laws_hold(1e-9));
  CHECK(coplanar.distributivity >= 0.5);
}

TEST_CASE("samples drawn from one Boolean framework satisfy distributivity") {
  // Events of the coordinate decomposition of C^3: all diagonal projectors.
  const Ket e1 = basis_ket(3, 0), e2 = basis_ket(3, 1), e3 = basis_ket(3, 2);
  const std::vector<Subspace> events = {
      Subspace::ray(e1), Subspace::span_of({e2, e3}), Subspace::span_of({e1, e2}),
      Subspace::ray(e3), Subspace::full(3)};
  const OrtholatticeReport report = check_ortholattice_axioms(events);
  CHECK(report.ortholattice_laws_hold(1e-10));
  CHECK(report.distributivity <= 1e-10);
}

TEST_CASE("spin conundrum: join over one axis fills C^2, meets across axes vanish") {
  Rng rng(53);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  auto random_axis = [&] {
    while (true) {
      const double x = coord(rng), y = coord(rng), z = coord(rng);
      const double len = std::sqrt(x * x + y * y + z * z);
      if (len > 0.1) return std::array<double, 3>{x / len, y / len, z / len};
    }
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto i = random_axis();
    auto j = random_axis();
    // Reject (anti)parallel pairs: the conundrum needs non-collinear axes.
    while (std::abs(i[0] * j[0] + i[1] * j[1] + i[2] * j[2]) > 0.99) j = random_axis();

    const Subspace ip = spin_half_subspace(i[0], i[1], i[2], +1);
    const Subspace im = spin_half_subspace(i[0], i[1], i[2], -1);
    CHECK(subspace_distance(q_join(ip, im), Subspace::full(2)) <= 1e-10);
    for (int si : {+1, -1})
      for (int sj : {+1, -1}) {
        const Subspace a = spin_half_subspace(i[0], i[1], i[2], si);
        const Subspace b = spin_half_subspace(j[0], j[1], j[2], sj);
        CHECK(subspace_distance(q_meet(a, b), Subspace::zero(2)) <= 1e-10);
      }
  }
}

TEST_CASE("subspace readers validate their input") {
  CMatrix not_projector(2, 2);
  not_projector << 0.5, 0.0, 0.0, 0.0;  // Hermitian but not idempotent
  CHECK_THROWS_AS(Projector(not_projector), ValidationError);
  CHECK_THROWS_AS(Subspace::from_orthonormal(2, {basis_ket(2, 0), basis_ket(2, 0)}),
                  ValidationError);
}
