#include <gtest/gtest.h>

#include <algorithm>

#include "helpers.hpp"
#include "tailatlas/decomposition.hpp"
#include "tailatlas/invariants.hpp"

namespace tailatlas {
namespace {

using testing::finite_fiber;
using testing::full_shift_2;
using testing::identity3_action;
using testing::parity_action;
using testing::reducible_two_blocks;
using testing::swap_action;

DecompositionReport decompose_checked(const ProductSystem& p) {
  auto rep = decompose(p);
  auto inv = verify_theorem_invariants(p, rep);
  EXPECT_TRUE(inv.all_passed()) << inv.failures();
  auto proj = project_atoms(p, rep);
  EXPECT_TRUE(proj.all_passed()) << proj.failures();
  return rep;
}

TEST(Decompose, SwapOverOneCellMergesTheFiber) {
  auto p = build_product(full_shift_2(), finite_fiber(2), swap_action());
  auto rep = decompose_checked(p);
  ASSERT_EQ(rep.components.size(), 1u);
  const auto& comp = rep.components[0];
  EXPECT_EQ(comp.kind, ComponentKind::Cycle);
  EXPECT_EQ(comp.period, 1);
  EXPECT_EQ(comp.n_e, 2);
  EXPECT_TRUE(comp.conservative);
  EXPECT_EQ(comp.conservativity_rule, "atoms of finite measure force returns");
  ASSERT_EQ(comp.atoms.size(), 1u);
  const auto& atom = comp.atoms[0];
  EXPECT_EQ(atom.states, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(atom.n_p, 2);
  EXPECT_EQ(atom.measure, Rat(2));
  ASSERT_EQ(rep.base_atoms.size(), 1u);
  EXPECT_EQ(rep.base_atoms[0].measure, Rat(1));
  EXPECT_TRUE(rep.transient_cells.empty());
}

TEST(Decompose, ParitySplitsIntoTwoLevelAtoms) {
  auto p = build_product(full_shift_2(), finite_fiber(2), parity_action());
  auto rep = decompose_checked(p);
  ASSERT_EQ(rep.components.size(), 1u);
  const auto& comp = rep.components[0];
  EXPECT_EQ(comp.period, 2);
  EXPECT_EQ(comp.n_e, 2);
  ASSERT_EQ(comp.atoms.size(), 2u);
  // Each atom is one fiber level across both cells, and one application of
  // the dynamics carries level 0 onto level 1.
  EXPECT_EQ(comp.atoms[0].states, (std::vector<int>{p.node(0, 0), p.node(1, 0)}));
  EXPECT_EQ(comp.atoms[1].states, (std::vector<int>{p.node(0, 1), p.node(1, 1)}));
  for (const auto& atom : comp.atoms) {
    EXPECT_EQ(atom.n_p, 1);
    EXPECT_EQ(atom.measure, Rat(1));
  }
  EXPECT_TRUE(comp.conservative);
}

TEST(Decompose, IdentityActionYieldsOneComponentPerFiberIndex) {
  auto p = build_product(full_shift_2(), finite_fiber(3), identity3_action());
  auto rep = decompose_checked(p);
  ASSERT_EQ(rep.components.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    const auto& comp = rep.components[i];
    EXPECT_EQ(comp.period, 1);
    EXPECT_EQ(comp.n_e, 1);
    EXPECT_TRUE(comp.conservative);
    ASSERT_EQ(comp.atoms.size(), 1u);
    EXPECT_EQ(comp.atoms[0].states, (std::vector<int>{p.node(0, i), p.node(1, i)}));
    EXPECT_EQ(comp.atoms[0].n_p, 1);
    EXPECT_EQ(comp.atoms[0].measure, Rat(1));
  }
}

TEST(Decompose, FiniteTranslationModFour) {
  // Translations by 1 and 3 on Z/4: the finite mirror of a one-dimensional
  // walk. Odd steps generate everything but parities alternate, so the four
  // fiber levels fold into a 2-cycle of two-level atoms.
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{1, 2, 3, 0}, {3, 0, 1, 2}};
  auto p = build_product(full_shift_2(), finite_fiber(4), a);
  auto rep = decompose_checked(p);
  ASSERT_EQ(rep.components.size(), 1u);
  const auto& comp = rep.components[0];
  EXPECT_EQ(comp.period, 2);
  EXPECT_EQ(comp.n_e, 4);
  ASSERT_EQ(comp.atoms.size(), 2u);
  for (const auto& atom : comp.atoms) {
    EXPECT_EQ(atom.n_p, 2);
    EXPECT_EQ(atom.states.size(), 4u);
    EXPECT_EQ(atom.measure, Rat(2));
  }
  // Atoms are the parity classes of the fiber index.
  for (int s : comp.atoms[0].states)
    EXPECT_EQ(p.fiber_of(s) % 2, p.fiber_of(comp.atoms[0].states[0]) % 2);
}

TEST(Decompose, ReducibleBaseSplitsByClosedClass) {
  // Cell t is transient; the self-loop cell x carries a swap, the 2-cycle
  // {y,z} swaps over y and holds over z.
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 1}, {1, 0}, {1, 0}, {0, 1}};
  auto b = reducible_two_blocks();
  auto p = build_product(b, finite_fiber(2), a);
  auto rep = decompose_checked(p);

  EXPECT_EQ(rep.transient_cells, (std::vector<int>{0}));
  ASSERT_EQ(rep.base_atoms.size(), 3u);
  EXPECT_EQ(rep.base_atoms[0].cells, (std::vector<int>{1}));
  EXPECT_EQ(rep.base_atoms[1].cells.size() + rep.base_atoms[2].cells.size(), 2u);

  ASSERT_EQ(rep.components.size(), 2u);
  const auto& cx = rep.components[0];
  EXPECT_EQ(cx.base_class, 0);
  EXPECT_EQ(cx.period, 2);
  EXPECT_EQ(cx.n_e, 2);
  ASSERT_EQ(cx.atoms.size(), 2u);
  EXPECT_EQ(cx.atoms[0].measure, make_rat(3, 10));

  const auto& cyz = rep.components[1];
  EXPECT_EQ(cyz.base_class, 1);
  EXPECT_EQ(cyz.period, 4);
  EXPECT_EQ(cyz.n_e, 2);
  ASSERT_EQ(cyz.atoms.size(), 4u);
  for (const auto& atom : cyz.atoms) {
    EXPECT_EQ(atom.n_p, 1);
    EXPECT_EQ(atom.states.size(), 1u);
  }
  // Following the image order alternates between the two base atoms of the
  // 2-cycle, visiting each twice.
  EXPECT_NE(cyz.atoms[0].base_atom, cyz.atoms[1].base_atom);
  EXPECT_EQ(cyz.atoms[0].base_atom, cyz.atoms[2].base_atom);
}

TEST(Decompose, AtomImageOrderFollowsTheDynamics) {
  auto p = build_product(full_shift_2(), finite_fiber(2), parity_action());
  auto rep = decompose(p);
  const auto& atoms = rep.components[0].atoms;
  // Every edge out of atom 0 lands in atom 1 and vice versa.
  for (int s : atoms[0].states)
    for (int t : p.graph.adj[s])
      EXPECT_TRUE(std::find(atoms[1].states.begin(), atoms[1].states.end(), t) !=
                  atoms[1].states.end());
}

TEST(BaseAtoms, CyclicClassesOfTheTwoCycle) {
  auto b = testing::two_cycle();
  auto cls = analyze_base_classes(b);
  ASSERT_EQ(cls.closed.size(), 1u);
  EXPECT_EQ(cls.period[0], 2);
  auto atoms = base_atoms_of(b, cls);
  ASSERT_EQ(atoms.size(), 2u);
  EXPECT_EQ(atoms[0].cells, (std::vector<int>{0}));
  EXPECT_EQ(atoms[1].cells, (std::vector<int>{1}));
  EXPECT_EQ(atoms[0].measure, make_rat(1, 2));
  EXPECT_EQ(atoms[0].closed_class, 0);
  EXPECT_EQ(atoms[1].cyclic_index, 1);
}

TEST(BaseAtoms, TransientCellsAreListed) {
  auto cls = analyze_base_classes(reducible_two_blocks());
  EXPECT_EQ(cls.transient_cells, (std::vector<int>{0}));
  ASSERT_EQ(cls.closed.size(), 2u);
  EXPECT_EQ(cls.closed[0], (std::vector<int>{1}));
  EXPECT_EQ(cls.closed[1], (std::vector<int>{2, 3}));
  EXPECT_EQ(cls.period[0], 1);
  EXPECT_EQ(cls.period[1], 2);
}

}  // namespace
}  // namespace tailatlas
