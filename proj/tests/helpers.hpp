#pragma once

#include "tailatlas/fiber_extension.hpp"
#include "tailatlas/symbolic_base.hpp"

namespace tailatlas::testing {

/// Full shift on two cells, uniform weights, stationary uniform measure.
inline SymbolicBaseSystem full_shift_2() {
  SymbolicBaseSystem b;
  b.cells = {"a", "b"};
  b.transition = {{make_rat(1, 2), make_rat(1, 2)},
                  {make_rat(1, 2), make_rat(1, 2)}};
  b.cell_measure = {make_rat(1, 2), make_rat(1, 2)};
  b.measure_preserving = true;
  return b;
}

/// Deterministic 2-cycle a -> b -> a.
inline SymbolicBaseSystem two_cycle() {
  SymbolicBaseSystem b;
  b.cells = {"a", "b"};
  b.transition = {{Rat(0), Rat(1)}, {Rat(1), Rat(0)}};
  b.cell_measure = {make_rat(1, 2), make_rat(1, 2)};
  b.measure_preserving = true;
  return b;
}

/// Single cell with a self loop.
inline SymbolicBaseSystem one_cell() {
  SymbolicBaseSystem b;
  b.cells = {"a"};
  b.transition = {{Rat(1)}};
  b.cell_measure = {Rat(1)};
  b.measure_preserving = true;
  return b;
}

/// Two disconnected full 2-shifts plus one transient feeder cell.
inline SymbolicBaseSystem reducible_two_blocks() {
  SymbolicBaseSystem b;
  b.cells = {"t", "x", "y", "z"};
  b.transition = {{Rat(0), make_rat(1, 2), make_rat(1, 2), Rat(0)},
                  {Rat(0), Rat(1), Rat(0), Rat(0)},
                  {Rat(0), Rat(0), Rat(0), Rat(1)},
                  {Rat(0), Rat(0), Rat(1), Rat(0)}};
  b.cell_measure = {make_rat(1, 10), make_rat(3, 10), make_rat(3, 10),
                    make_rat(3, 10)};
  b.measure_preserving = false;
  return b;
}

inline FiberSet finite_fiber(int size) {
  FiberSet f;
  f.kind = FiberKind::Finite;
  f.size = size;
  return f;
}

inline FiberSet lattice_fiber(int dim, int window) {
  FiberSet f;
  f.kind = FiberKind::Lattice;
  f.dimension = dim;
  f.window = window;
  return f;
}

/// sigma_a = identity, sigma_b = swap on F = {0,1}.
inline FiberAction swap_action() {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 1}, {1, 0}};
  return a;
}

/// Both cells swap: the fiber index flips every step.
inline FiberAction parity_action() {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{1, 0}, {1, 0}};
  return a;
}

/// Identity on F = {0,1,2} over both cells.
inline FiberAction identity3_action() {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.maps = {{0, 1, 2}, {0, 1, 2}};
  return a;
}

inline FiberAction lattice_action(const std::vector<FiberVec>& disp) {
  FiberAction a;
  a.mode = ActionMode::Bijective;
  a.displacements = disp;
  return a;
}

}  // namespace tailatlas::testing
