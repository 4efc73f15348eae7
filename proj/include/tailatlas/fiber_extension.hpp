#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tailatlas/checks.hpp"
#include "tailatlas/errors.hpp"
#include "tailatlas/lattice_algebra.hpp"
#include "tailatlas/symbolic_base.hpp"

namespace tailatlas {

/// Fiber coordinate vector. Only the first `dimension` entries of a FiberVec
/// are meaningful; the rest stay zero so comparisons work uniformly.
using FiberVec = std::array<std::int64_t, 3>;

inline FiberVec fiber_vec(std::int64_t a = 0, std::int64_t b = 0, std::int64_t c = 0) {
  return {a, b, c};
}

enum class FiberKind { Finite, Lattice };
enum class ActionMode { Surjective, Bijective };

/// The fiber over every base point: either {0..size-1} or Z^dimension with
/// computations confined to the window |i_j| <= window.
struct FiberSet {
  FiberKind kind = FiberKind::Finite;
  int size = 0;       // Finite
  int dimension = 0;  // Lattice: 1..3
  int window = 0;     // Lattice: L
};

/// Cell-constant fiber action: over a point in base cell c, the fiber index
/// moves by maps[c] (finite) or is translated by displacements[c] (lattice).
/// Lattice actions are translations and therefore always bijective.
struct FiberAction {
  ActionMode mode = ActionMode::Bijective;
  std::vector<std::vector<int>> maps;     // finite: maps[c][i] = image of i
  std::vector<FiberVec> displacements;    // lattice: per-cell translation
};

struct ActionValidation {
  CheckReport report;
  // Lattice only: echelon basis of the subgroup of Z^d generated by the
  // pairwise displacement differences and by reachable cycle sums.
  std::vector<FiberVec> subgroup_basis;
};

namespace detail {

/// (length, displacement) generators of the cycle group of one strongly
/// connected cell set: one generator per edge, relative to a BFS spanning
/// tree from nodes[0]. The group they span equals the group spanned by the
/// (length, displacement) pairs of all closed walks in the set.
inline std::vector<LVec> cycle_group_generators(const SymbolicBaseSystem& base,
                                                const std::vector<FiberVec>& psi,
                                                int dimension,
                                                const std::vector<int>& nodes,
                                                std::vector<std::int64_t>* ref_len = nullptr,
                                                std::vector<FiberVec>* ref_disp = nullptr) {
  const int n = base.size();
  std::vector<int> in_set(n, 0);
  for (int c : nodes) in_set[c] = 1;
  std::vector<std::int64_t> len(n, -1);
  std::vector<FiberVec> disp(n, fiber_vec());
  std::vector<int> order;
  len[nodes[0]] = 0;
  order.push_back(nodes[0]);
  for (std::size_t head = 0; head < order.size(); ++head) {
    int c = order[head];
    for (int d = 0; d < n; ++d) {
      if (base.transition[c][d] == 0 || !in_set[d] || len[d] != -1) continue;
      len[d] = len[c] + 1;
      for (int j = 0; j < dimension; ++j) disp[d][j] = disp[c][j] + psi[c][j];
      order.push_back(d);
    }
  }
  std::vector<LVec> gens;
  for (int c : nodes)
    for (int d = 0; d < n; ++d) {
      if (base.transition[c][d] == 0 || !in_set[d]) continue;
      LVec g(1 + dimension);
      g[0] = Int(len[c] + 1 - len[d]);
      for (int j = 0; j < dimension; ++j)
        g[1 + j] = Int(disp[c][j] + psi[c][j] - disp[d][j]);
      gens.push_back(g);
    }
  if (ref_len) *ref_len = len;
  if (ref_disp) *ref_disp = disp;
  return gens;
}

}  // namespace detail

/// Checks the declared action against the base system. For finite fibers,
/// Surjective mode checks onto-ness (which on a finite set forces bijectivity,
/// and the report says so); Bijective mode checks the maps are permutations.
/// For lattice fibers the mode must be Bijective, and the report carries the
/// subgroup of Z^d generated by displacement differences and cycle sums.
inline ActionValidation validate_action(const SymbolicBaseSystem& base,
                                        const FiberSet& fiber,
                                        const FiberAction& action) {
  ActionValidation out;
  CheckReport& rep = out.report;
  rep.title = "fiber action validation";
  const int n = base.size();

  if (fiber.kind == FiberKind::Finite) {
    bool shape = fiber.size >= 1 &&
                 action.maps.size() == static_cast<std::size_t>(n);
    for (const auto& m : action.maps)
      shape = shape && m.size() == static_cast<std::size_t>(fiber.size);
    rep.add("shape", shape);
    if (!shape) return out;
    bool in_range = true;
    for (const auto& m : action.maps)
      for (int v : m) in_range = in_range && 0 <= v && v < fiber.size;
    rep.add("values in range", in_range);
    if (!in_range) return out;
    for (int c = 0; c < n; ++c) {
      std::vector<int> hit(fiber.size, 0);
      for (int v : action.maps[c]) hit[v] = 1;
      bool onto = true;
      for (int h : hit) onto = onto && h == 1;
      // Onto a finite set of equal size is automatically one-to-one.
      rep.add("onto over cell " + base.cells[c], onto,
              onto ? "" : "image misses a fiber index");
      if (action.mode == ActionMode::Bijective)
        rep.add("bijective over cell " + base.cells[c], onto,
                onto ? "" : "not a permutation");
    }
    if (action.mode == ActionMode::Surjective && rep.all_passed())
      rep.add("note", true,
              "surjective onto a finite fiber is necessarily bijective");
    return out;
  }

  // Lattice
  bool dim_ok = 1 <= fiber.dimension && fiber.dimension <= 3;
  rep.add("dimension in 1..3", dim_ok);
  rep.add("window positive", fiber.window >= 1);
  if (action.mode != ActionMode::Bijective)
    throw Error(ErrorKind::InvalidInput,
                "lattice actions are translations and must be declared Bijective");
  bool shape = action.displacements.size() == static_cast<std::size_t>(n);
  rep.add("shape", shape);
  if (!shape || !dim_ok) return out;

  std::vector<LVec> gens;
  for (int c = 1; c < n; ++c) {
    LVec g(fiber.dimension);
    for (int j = 0; j < fiber.dimension; ++j)
      g[j] = Int(action.displacements[c][j] - action.displacements[0][j]);
    gens.push_back(g);
  }
  SccResult scc = strongly_connected_components(base.graph());
  std::vector<bool> closed = closed_components(base.graph(), scc);
  for (int comp = 0; comp < scc.count; ++comp) {
    if (!closed[comp]) continue;
    std::vector<int> nodes;
    for (int c = 0; c < n; ++c)
      if (scc.comp[c] == comp) nodes.push_back(c);
    auto cyc = detail::cycle_group_generators(base, action.displacements,
                                              fiber.dimension, nodes);
    // Project the (length, displacement) generators onto displacement parts
    // and add one realized closed-walk displacement per class.
    IntLattice time_disp = lattice_from_generators(1 + fiber.dimension, cyc);
    for (const auto& row : time_disp.rows)
      gens.push_back(LVec(row.begin() + 1, row.end()));
  }
  IntLattice sub = lattice_from_generators(fiber.dimension, gens);
  for (const auto& row : sub.rows) {
    FiberVec v = fiber_vec();
    for (int j = 0; j < fiber.dimension; ++j)
      v[j] = row[j].convert_to<std::int64_t>();
    out.subgroup_basis.push_back(v);
  }
  std::string basis_str;
  for (const auto& v : out.subgroup_basis) {
    basis_str += "(";
    for (int j = 0; j < fiber.dimension; ++j)
      basis_str += (j ? "," : "") + std::to_string(v[j]);
    basis_str += ")";
  }
  rep.add("displacement subgroup", true,
          out.subgroup_basis.empty() ? "trivial" : basis_str);
  return out;
}

}  // namespace tailatlas
