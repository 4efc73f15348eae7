#include <gtest/gtest.h>

#include <algorithm>

#include "helpers.hpp"
#include "tailatlas/product_system.hpp"

namespace tailatlas {
namespace {

using testing::finite_fiber;
using testing::full_shift_2;
using testing::lattice_action;
using testing::lattice_fiber;
using testing::one_cell;
using testing::reducible_two_blocks;
using testing::swap_action;
using testing::two_cycle;

TEST(ValidateAction, PermutationsPass) {
  auto v = validate_action(full_shift_2(), finite_fiber(2), swap_action());
  EXPECT_TRUE(v.report.all_passed()) << v.report.failures();
}

TEST(ValidateAction, SurjectiveOnFiniteFiberNotesBijectivity) {
  auto a = swap_action();
  a.mode = ActionMode::Surjective;
  auto v = validate_action(full_shift_2(), finite_fiber(2), a);
  EXPECT_TRUE(v.report.all_passed());
  ASSERT_FALSE(v.report.items.empty());
  EXPECT_EQ(v.report.items.back().detail,
            "surjective onto a finite fiber is necessarily bijective");
}

TEST(ValidateAction, NonOntoMapIsCitedByCell) {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 0}, {0, 1}};
  auto v = validate_action(full_shift_2(), finite_fiber(2), a);
  EXPECT_FALSE(v.report.all_passed());
  bool found = false;
  for (const auto& item : v.report.items)
    if (item.name == "onto over cell a") {
      found = true;
      EXPECT_FALSE(item.passed);
      EXPECT_EQ(item.detail, "image misses a fiber index");
    }
  EXPECT_TRUE(found);
}

TEST(ValidateAction, OutOfRangeValuesFail) {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 2}, {0, 1}};
  auto v = validate_action(full_shift_2(), finite_fiber(2), a);
  EXPECT_FALSE(v.report.all_passed());
}

TEST(ValidateAction, LatticeSurjectiveModeIsRejected) {
  auto a = lattice_action({fiber_vec(1), fiber_vec(-1)});
  a.mode = ActionMode::Surjective;
  try {
    validate_action(full_shift_2(), lattice_fiber(1, 3), a);
    FAIL() << "expected InvalidInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(ValidateAction, FullShiftDisplacementSubgroupIsWholeLine) {
  // Self loops realize +1 and -1 directly, so cycle sums span everything.
  auto v = validate_action(full_shift_2(), lattice_fiber(1, 3),
                           lattice_action({fiber_vec(1), fiber_vec(-1)}));
  EXPECT_TRUE(v.report.all_passed());
  ASSERT_EQ(v.subgroup_basis.size(), 1u);
  EXPECT_EQ(v.subgroup_basis[0][0], 1);
}

TEST(ValidateAction, TwoCycleDisplacementSubgroupIsEven) {
  // Every closed walk alternates +1 and -1; only the difference -2 remains.
  auto v = validate_action(two_cycle(), lattice_fiber(1, 3),
                           lattice_action({fiber_vec(1), fiber_vec(-1)}));
  EXPECT_TRUE(v.report.all_passed());
  ASSERT_EQ(v.subgroup_basis.size(), 1u);
  EXPECT_EQ(v.subgroup_basis[0][0], 2);
}

TEST(BuildProduct, FiniteProductGraph) {
  auto p = build_product(full_shift_2(), finite_fiber(2), swap_action());
  EXPECT_EQ(p.node_count(), 4);
  EXPECT_EQ(p.fiber_count, 2);
  EXPECT_EQ(p.node(1, 1), 3);
  EXPECT_EQ(p.cell_of(3), 1);
  EXPECT_EQ(p.fiber_of(3), 1);
  // Over cell a the fiber is fixed, over cell b it flips.
  std::vector<int> from_a0 = p.graph.adj[p.node(0, 0)];
  std::sort(from_a0.begin(), from_a0.end());
  EXPECT_EQ(from_a0, (std::vector<int>{p.node(0, 0), p.node(1, 0)}));
  std::vector<int> from_b1 = p.graph.adj[p.node(1, 1)];
  std::sort(from_b1.begin(), from_b1.end());
  EXPECT_EQ(from_b1, (std::vector<int>{p.node(0, 0), p.node(1, 0)}));
  EXPECT_TRUE(p.boundary.empty());
  EXPECT_EQ(p.lifted_measure(p.node(0, 1)), make_rat(1, 2));
}

TEST(BuildProduct, LatticeWindowEnumerationAndBoundary) {
  auto p = build_product(full_shift_2(), lattice_fiber(1, 1),
                         lattice_action({fiber_vec(1), fiber_vec(-1)}));
  EXPECT_EQ(p.fiber_count, 3);
  ASSERT_EQ(p.window_points.size(), 3u);
  EXPECT_EQ(p.window_points[0][0], -1);
  EXPECT_EQ(p.window_points[1][0], 0);
  EXPECT_EQ(p.window_points[2][0], 1);
  EXPECT_EQ(p.window_index(fiber_vec(0)), 1);
  EXPECT_EQ(p.window_index(fiber_vec(-1)), 0);
  EXPECT_EQ(p.window_index(fiber_vec(2)), -1);

  // Pushing +1 from the right edge, or -1 from the left edge, leaves the
  // window: two source states, two base targets each.
  EXPECT_EQ(p.boundary.size(), 4u);
  int interior_edges = 0;
  for (const auto& adj : p.graph.adj) interior_edges += static_cast<int>(adj.size());
  EXPECT_EQ(interior_edges, 8);
  for (const auto& be : p.boundary) {
    int v = p.fiber_of(be.from) == 2 ? 2 : -2;
    EXPECT_EQ(be.to_fiber[0], v);
  }
}

TEST(BuildProduct, ZeroDriftWithoutVisibleCycleUnderflows) {
  // Steps of size 5 cannot close up inside a window of radius 2, yet the
  // mean displacement is zero, so a cycle provably exists outside.
  try {
    build_product(two_cycle(), lattice_fiber(1, 2),
                  lattice_action({fiber_vec(5), fiber_vec(-5)}));
    FAIL() << "expected WindowUnderflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowUnderflow);
    EXPECT_NE(std::string(e.what()).find("enlarge the window"), std::string::npos);
  }
}

TEST(BuildProduct, NonzeroDriftAcyclicWindowIsAccepted) {
  auto p = build_product(one_cell(), lattice_fiber(1, 2),
                         lattice_action({fiber_vec(5)}));
  EXPECT_EQ(p.fiber_count, 5);
  EXPECT_FALSE(p.boundary.empty());
}

TEST(ClassStationary, RestrictedBlockAndWholeSystem) {
  auto b = reducible_two_blocks();
  auto pi = class_stationary(b, {2, 3});
  ASSERT_EQ(pi.size(), 2u);
  EXPECT_EQ(pi[0], make_rat(1, 2));
  EXPECT_EQ(pi[1], make_rat(1, 2));

  auto f = full_shift_2();
  auto pi2 = class_stationary(f, {0, 1});
  EXPECT_EQ(pi2[0], make_rat(1, 2));
  EXPECT_EQ(pi2[1], make_rat(1, 2));
}

TEST(ClassDrift, ZeroMeanAndBiasedWalks) {
  auto f = full_shift_2();
  auto zero = class_drift(f, lattice_action({fiber_vec(1), fiber_vec(-1)}), 1, {0, 1});
  EXPECT_EQ(zero[0], Rat(0));
  auto biased = class_drift(f, lattice_action({fiber_vec(1), fiber_vec(1)}), 1, {0, 1});
  EXPECT_EQ(biased[0], Rat(1));
}

TEST(ProjectionIdentity, HoldsOnFiniteAndLatticeProducts) {
  auto p = build_product(full_shift_2(), finite_fiber(2), swap_action());
  auto rep = check_projection_identity(p, 200, 7u);
  EXPECT_TRUE(rep.all_passed()) << rep.failures();

  auto q = build_product(full_shift_2(), lattice_fiber(1, 3),
                         lattice_action({fiber_vec(1), fiber_vec(-1)}));
  auto rep2 = check_projection_identity(q, 200, 7u);
  EXPECT_TRUE(rep2.all_passed()) << rep2.failures();
}

TEST(MeasurePreservation, ExactOnBijectiveProduct) {
  auto p = build_product(full_shift_2(), finite_fiber(2), swap_action());
  auto rep = check_measure_preservation(p);
  EXPECT_TRUE(rep.all_passed()) << rep.failures();
}

TEST(MeasurePreservation, SurjectiveModeLacksTheHypothesis) {
  auto a = swap_action();
  a.mode = ActionMode::Surjective;
  auto p = build_product(full_shift_2(), finite_fiber(2), a);
  try {
    check_measure_preservation(p);
    FAIL() << "expected HypothesisNotMet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisNotMet);
  }
}

TEST(MeasurePreservation, NonStationaryBaseIsReported) {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 1}, {0, 1}, {0, 1}, {1, 0}};
  auto p = build_product(reducible_two_blocks(), finite_fiber(2), a);
  auto rep = check_measure_preservation(p);
  EXPECT_FALSE(rep.all_passed());
  // The lift fails exactly because the base does; the agreement item passes.
  EXPECT_FALSE(rep.items[0].passed);
  EXPECT_TRUE(rep.items[2].passed);
}

}  // namespace
}  // namespace tailatlas
