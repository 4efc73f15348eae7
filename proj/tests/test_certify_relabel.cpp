#include <gtest/gtest.h>

#include <string>

#include "helpers.hpp"
#include "tailatlas/certify.hpp"
#include "tailatlas/relabel.hpp"

namespace tailatlas {
namespace {

using testing::finite_fiber;
using testing::full_shift_2;
using testing::lattice_action;
using testing::lattice_fiber;
using testing::one_cell;
using testing::parity_action;
using testing::reducible_two_blocks;
using testing::swap_action;
using testing::two_cycle;

TEST(Certify, SwapAtomReachesTheProjectorInTwoPowers) {
  auto p = build_product(full_shift_2(), finite_fiber(2), swap_action());
  auto rep = decompose(p);
  auto certs = certify_exactness(p, rep);
  ASSERT_EQ(certs.size(), 1u);
  EXPECT_EQ(certs[0].method, "matrix-power");
  EXPECT_TRUE(certs[0].primitive);
  EXPECT_EQ(certs[0].power, 2);
  EXPECT_EQ(certs[0].norm, 0.0);
}

TEST(Certify, ParityLevelAtomsAreInstant) {
  auto p = build_product(full_shift_2(), finite_fiber(2), parity_action());
  auto rep = decompose(p);
  auto certs = certify_exactness(p, rep);
  ASSERT_EQ(certs.size(), 2u);
  for (const auto& cert : certs) {
    EXPECT_TRUE(cert.primitive);
    EXPECT_EQ(cert.power, 1);
    EXPECT_EQ(cert.norm, 0.0);
  }
}

TEST(Certify, LatticeAtomsCarryAlgebraicCertificates) {
  auto p = build_product(full_shift_2(), lattice_fiber(1, 6),
                         lattice_action({fiber_vec(1), fiber_vec(-1)}));
  auto rep = decompose(p);
  auto certs = certify_exactness(p, rep);
  ASSERT_EQ(certs.size(), 2u);
  for (const auto& cert : certs) {
    EXPECT_EQ(cert.method, "cycle-algebra");
    EXPECT_TRUE(cert.primitive);
    EXPECT_EQ(cert.power, 0);
    EXPECT_EQ(cert.norm, 0.0);
  }
}

TEST(Certify, MergedLevelsAreNotPrimitive) {
  // Gluing the two parity levels into one claimed atom leaves a period-2
  // map on it, which certification must refuse.
  auto p = build_product(full_shift_2(), finite_fiber(2), parity_action());
  auto rep = decompose(p);
  Atom big;
  big.states = {0, 1, 2, 3};
  big.n_p = 2;
  big.base_atom = 0;
  rep.components[0].period = 1;
  rep.components[0].atoms = {big};
  try {
    certify_exactness(p, rep);
    FAIL() << "expected CertificationFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CertificationFailed);
    EXPECT_NE(std::string(e.what()).find("has period 2"), std::string::npos);
  }
}

TEST(Certify, DisconnectedClaimedAtomFails) {
  auto p = build_product(full_shift_2(), finite_fiber(2), swap_action());
  auto rep = decompose(p);
  rep.components[0].atoms[0].states = {p.node(0, 0), p.node(0, 1)};
  try {
    certify_exactness(p, rep);
    FAIL() << "expected CertificationFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CertificationFailed);
    EXPECT_NE(std::string(e.what()).find("not strongly connected"),
              std::string::npos);
  }
}

TEST(Certify, NearlyReducibleChainMixesSlowly) {
  // Leak rate 1/1000 between two otherwise absorbing cells: the spread
  // decays like (1 - 2/1000)^n and needs about 10700 powers to contract
  // below 1e-9, past the default budget.
  SymbolicBaseSystem b;
  b.cells = {"p", "q"};
  b.transition = {{make_rat(999, 1000), make_rat(1, 1000)},
                  {make_rat(1, 1000), make_rat(999, 1000)}};
  b.cell_measure = {make_rat(1, 2), make_rat(1, 2)};
  b.measure_preserving = true;
  FiberAction trivial;
  trivial.mode = ActionMode::Bijective;
  trivial.maps = {{0}, {0}};
  auto p = build_product(b, finite_fiber(1), trivial);
  auto rep = decompose(p);

  try {
    certify_exactness(p, rep);
    FAIL() << "expected SlowMixing";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SlowMixing);
  }

  auto certs = certify_exactness(p, rep, 1e-9, 20000);
  ASSERT_EQ(certs.size(), 1u);
  EXPECT_TRUE(certs[0].primitive);
  EXPECT_GT(certs[0].power, 10000);
  EXPECT_LT(certs[0].power, 11000);
  EXPECT_GT(certs[0].norm, 0.0);
  EXPECT_LT(certs[0].norm, 1e-9);
}

TEST(Relabel, ParityIsAlreadyLevelAligned) {
  auto p = build_product(full_shift_2(), finite_fiber(2), parity_action());
  auto rep = decompose(p);
  auto rl = relabel_levels(p, rep);
  EXPECT_TRUE(rl.verification.all_passed()) << rl.verification.failures();
  EXPECT_FALSE(rl.refined);
  EXPECT_EQ(rl.relabel_finite, (std::vector<std::vector<int>>{{0, 1}, {0, 1}}));
  EXPECT_EQ(rl.action.maps, p.action.maps);
}

TEST(Relabel, PlusOneModThreeKeepsLevelAtoms) {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{1, 2, 0}, {1, 2, 0}};
  auto p = build_product(full_shift_2(), finite_fiber(3), a);
  auto rep = decompose(p);
  ASSERT_EQ(rep.components.size(), 1u);
  EXPECT_EQ(rep.components[0].period, 3);
  auto rl = relabel_levels(p, rep);
  EXPECT_TRUE(rl.verification.all_passed()) << rl.verification.failures();
  EXPECT_FALSE(rl.refined);
  // The atoms were fiber levels to begin with, so nothing moves.
  for (const auto& row : rl.relabel_finite)
    EXPECT_EQ(row, (std::vector<int>{0, 1, 2}));
}

TEST(Relabel, StaggeredSixCycleShiftsOneCell) {
  // Stepping +1 only over cell a of the 2-cycle gives a 6-cycle of
  // single-state atoms; over cell b the levels come back rotated and the
  // relabeling must absorb the rotation.
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{1, 2, 0}, {0, 1, 2}};
  auto p = build_product(two_cycle(), finite_fiber(3), a);
  auto rep = decompose(p);
  ASSERT_EQ(rep.components.size(), 1u);
  EXPECT_EQ(rep.components[0].period, 6);
  auto rl = relabel_levels(p, rep);
  EXPECT_TRUE(rl.verification.all_passed()) << rl.verification.failures();
  EXPECT_FALSE(rl.refined);
  EXPECT_EQ(rl.relabel_finite[0], (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(rl.relabel_finite[1], (std::vector<int>{2, 0, 1}));
}

TEST(Relabel, ReducibleBaseRelabelsEachClassOnItsOwn) {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 1}, {1, 0}, {1, 0}, {0, 1}};
  auto p = build_product(reducible_two_blocks(), finite_fiber(2), a);
  auto rep = decompose(p);
  auto rl = relabel_levels(p, rep);
  EXPECT_TRUE(rl.verification.all_passed()) << rl.verification.failures();
  EXPECT_FALSE(rl.refined);
  // The 4-cycle over {y,z} visits z half a period out of phase, so the
  // fiber over z is swapped into alignment.
  EXPECT_EQ(rl.relabel_finite[2], (std::vector<int>{0, 1}));
  EXPECT_EQ(rl.relabel_finite[3], (std::vector<int>{1, 0}));
}

TEST(Relabel, ZeroMeanWalkNeedsNoShift) {
  auto p = build_product(full_shift_2(), lattice_fiber(1, 6),
                         lattice_action({fiber_vec(1), fiber_vec(-1)}));
  auto rep = decompose(p);
  auto rl = relabel_levels(p, rep);
  EXPECT_TRUE(rl.verification.all_passed()) << rl.verification.failures();
  EXPECT_FALSE(rl.refined);
  EXPECT_EQ(rl.relabel_shift[0][0], 0);
  EXPECT_EQ(rl.relabel_shift[1][0], 0);
}

TEST(Relabel, AlternatingWalkOverTheTwoCycleIsShiftedFlat) {
  auto p = build_product(two_cycle(), lattice_fiber(1, 6),
                         lattice_action({fiber_vec(1), fiber_vec(-1)}));
  auto rep = decompose(p);
  auto rl = relabel_levels(p, rep);
  EXPECT_TRUE(rl.verification.all_passed()) << rl.verification.failures();
  EXPECT_FALSE(rl.refined);
  // Shifting cell b down by one cancels the walk entirely.
  EXPECT_EQ(rl.relabel_shift[0][0], 0);
  EXPECT_EQ(rl.relabel_shift[1][0], -1);
  EXPECT_EQ(rl.action.displacements[0][0], 0);
  EXPECT_EQ(rl.action.displacements[1][0], 0);
}

TEST(Relabel, ChainsNeverRealign) {
  auto p = build_product(one_cell(), lattice_fiber(1, 5),
                         lattice_action({fiber_vec(1)}));
  auto rep = decompose(p);
  try {
    relabel_levels(p, rep);
    FAIL() << "expected HypothesisNotMet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisNotMet);
    EXPECT_NE(std::string(e.what()).find("is a chain"), std::string::npos);
  }
}

TEST(Relabel, DissipativeCyclesAreRejected) {
  auto p = build_product(full_shift_2(), lattice_fiber(1, 8),
                         lattice_action({fiber_vec(1), fiber_vec(3)}));
  auto rep = decompose(p);
  try {
    relabel_levels(p, rep);
    FAIL() << "expected HypothesisNotMet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisNotMet);
    EXPECT_NE(std::string(e.what()).find("dissipative"), std::string::npos);
  }
}

TEST(Relabel, EdgeRefinementOfTheTwoCycle) {
  auto eb = detail::refine_to_edges(two_cycle());
  ASSERT_EQ(eb.base.size(), 2);
  EXPECT_EQ(eb.base.cells, (std::vector<std::string>{"a>b", "b>a"}));
  EXPECT_EQ(eb.base.cell_measure[0], make_rat(1, 2));
  EXPECT_EQ(eb.base.transition[0][1], Rat(1));
  EXPECT_EQ(eb.base.transition[0][0], Rat(0));
  EXPECT_EQ(eb.edge_of_cell[0], (std::pair<int, int>{0, 1}));
  EXPECT_EQ(eb.edge_of_cell[1], (std::pair<int, int>{1, 0}));
}

}  // namespace
}  // namespace tailatlas
