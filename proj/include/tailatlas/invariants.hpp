#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tailatlas/checks.hpp"
#include "tailatlas/decomposition.hpp"

namespace tailatlas {

namespace detail {

inline std::set<int> one_step_image(const ProductSystem& p, const std::vector<int>& states) {
  std::set<int> out;
  for (int u : states)
    for (int v : p.graph.adj[u]) out.insert(v);
  return out;
}

inline std::string atom_label(std::size_t ci, std::size_t ai) {
  return "component " + std::to_string(ci) + " atom " + std::to_string(ai);
}

}  // namespace detail

/// Re-derives every structural identity the decomposition claims, from the
/// product system alone, and reports each as a named check: atoms partition
/// the recurrent states, the one-step image of an atom is exactly the next
/// atom, the period-step map fixes each atom, fiber multiplicities are
/// constant where constancy is claimed, and the exact measure identities
/// relating atom, component and base-atom measures hold.
inline CheckReport verify_theorem_invariants(const ProductSystem& p,
                                             const DecompositionReport& rep) {
  CheckReport report;
  report.title = "tail decomposition invariants";

  std::set<int> transient_cells(rep.transient_cells.begin(), rep.transient_cells.end());

  // Partition: every state over a closed base class in exactly one atom,
  // states over transient cells in none.
  {
    std::map<int, int> owner;
    bool disjoint = true;
    for (const auto& comp : rep.components)
      for (const auto& atom : comp.atoms)
        for (int s : atom.states) disjoint = disjoint && owner.emplace(s, 1).second;
    std::set<int> suppressed(rep.suppressed_states.begin(), rep.suppressed_states.end());
    for (int s : suppressed) disjoint = disjoint && !owner.count(s);
    bool covered = true;
    bool clean = true;
    for (int u = 0; u < p.node_count(); ++u) {
      bool in_atoms = owner.count(u) > 0 || suppressed.count(u) > 0;
      if (transient_cells.count(p.cell_of(u)))
        clean = clean && !in_atoms;
      else
        covered = covered && in_atoms;
    }
    report.add("atoms are pairwise disjoint", disjoint);
    report.add("atoms and suppressed translates cover every state over a closed base class",
               covered);
    report.add("no atom touches a transient base cell", clean);
  }

  for (std::size_t ci = 0; ci < rep.components.size(); ++ci) {
    const Component& comp = rep.components[ci];
    const std::string where = "component " + std::to_string(ci);

    if (!comp.lattice) {
      long long m = comp.period;

      // One-step images walk the atom cycle; composing m steps returns.
      bool image_ok = true;
      std::string image_detail;
      for (std::size_t ai = 0; ai < comp.atoms.size(); ++ai) {
        std::set<int> img = detail::one_step_image(p, comp.atoms[ai].states);
        const auto& next = comp.atoms[(ai + 1) % m].states;
        if (!(img == std::set<int>(next.begin(), next.end()))) {
          image_ok = false;
          image_detail = detail::atom_label(ci, ai) + " does not map onto its successor";
          break;
        }
      }
      report.add(where + ": one-step image of each atom is the next atom", image_ok,
                 image_detail);

      bool fixed_ok = true;
      for (std::size_t ai = 0; ai < comp.atoms.size() && fixed_ok; ++ai) {
        std::set<int> cur(comp.atoms[ai].states.begin(), comp.atoms[ai].states.end());
        for (long long s = 0; s < m; ++s) {
          std::vector<int> v(cur.begin(), cur.end());
          cur = detail::one_step_image(p, v);
        }
        fixed_ok = cur == std::set<int>(comp.atoms[ai].states.begin(),
                                        comp.atoms[ai].states.end());
      }
      report.add(where + ": the period-step map fixes each atom", fixed_ok);

      // Fiber multiplicity over each cell is the same number everywhere in
      // the atom, and the same across the component's atoms.
      bool np_ok = true;
      std::string np_detail;
      for (std::size_t ai = 0; ai < comp.atoms.size() && np_ok; ++ai) {
        std::map<int, long long> per_cell;
        for (int s : comp.atoms[ai].states) per_cell[p.cell_of(s)]++;
        for (const auto& [cell, count] : per_cell)
          if (count != comp.atoms[ai].n_p) {
            np_ok = false;
            np_detail = detail::atom_label(ci, ai) + " holds " + std::to_string(count) +
                        " fibers over cell " + p.base.cells[cell] + ", claimed " +
                        std::to_string(comp.atoms[ai].n_p);
            break;
          }
        if (comp.atoms[ai].n_p != comp.atoms[0].n_p) {
          np_ok = false;
          np_detail = "multiplicity differs between atoms of " + where;
        }
      }
      report.add(where + ": per-cell fiber multiplicity is constant", np_ok, np_detail);

      // Multiplicity over the whole component is cell-independent.
      bool ne_ok = true;
      std::string ne_detail;
      {
        std::map<int, long long> per_cell;
        for (const auto& atom : comp.atoms)
          for (int s : atom.states) per_cell[p.cell_of(s)]++;
        for (const auto& [cell, count] : per_cell)
          if (count != comp.n_e) {
            ne_ok = false;
            ne_detail = "component multiplicity over cell " + p.base.cells[cell] +
                        " is " + std::to_string(count) + ", claimed " +
                        std::to_string(comp.n_e);
            break;
          }
      }
      report.add(where + ": fiber multiplicity over the component is constant", ne_ok,
                 ne_detail);

      // Exact measure identities.
      bool measure_ok = true;
      bool lower_ok = true;
      Rat total = 0;
      for (const auto& atom : comp.atoms) {
        Rat projected = rep.base_atoms[atom.base_atom].measure;
        Rat direct = 0;
        for (int s : atom.states) direct += p.lifted_measure(s);
        measure_ok = measure_ok && direct == atom.measure &&
                     atom.measure == Rat(atom.n_p) * projected;
        lower_ok = lower_ok && atom.measure >= projected;
        total += atom.measure;
      }
      report.add(where + ": atom measure equals multiplicity times projected measure",
                 measure_ok);
      report.add(where + ": atom measure dominates its projection", lower_ok);

      Rat class_measure = 0;
      for (const auto& ba : rep.base_atoms)
        if (ba.closed_class == comp.base_class) class_measure += ba.measure;
      report.add(where + ": component measure equals multiplicity times class measure",
                 total == Rat(comp.n_e) * class_measure);

      if (p.base.measure_preserving) {
        bool equal_ok = true;
        for (const auto& atom : comp.atoms)
          equal_ok = equal_ok && Rat(m) * atom.measure == total;
        report.add(where + ": component splits into equal-measure atoms", equal_ok);
      } else {
        report.add(where + ": component splits into equal-measure atoms", true,
                   "skipped: base measure is not stationary");
      }
    } else {
      // Lattice component: the claims are algebraic, so re-derive the phase
      // bookkeeping and confirm it against every window edge.
      const int d = p.fiber.dimension;
      BaseClasses cls = analyze_base_classes(p.base);
      const std::vector<int>& nodes = cls.closed[comp.base_class];
      detail::LatticeClassData lcd =
          detail::lattice_class_data(p.base, p.action, d, nodes);

      std::set<int> cell_set(nodes.begin(), nodes.end());
      auto phase_key = [&](int cell, const FiberVec& f) {
        return lattice_residue(lcd.G, detail::phase_vector(lcd, d, cell, f));
      };

      // The phase drops by one time unit along every edge, interior or not.
      bool cocycle_ok = true;
      std::string cocycle_detail;
      for (int u = 0; u < p.node_count() && cocycle_ok; ++u) {
        if (!cell_set.count(p.cell_of(u))) continue;
        LVec from = detail::phase_vector(lcd, d, p.cell_of(u),
                                         p.window_points[p.fiber_of(u)]);
        from[0] -= 1;
        LVec want = lattice_residue(lcd.G, from);
        for (int v : p.graph.adj[u])
          if (phase_key(p.cell_of(v), p.window_points[p.fiber_of(v)]) != want) {
            cocycle_ok = false;
            cocycle_detail = "interior edge from node " + std::to_string(u);
            break;
          }
      }
      for (const auto& be : p.boundary) {
        if (!cell_set.count(p.cell_of(be.from))) continue;
        LVec from = detail::phase_vector(lcd, d, p.cell_of(be.from),
                                         p.window_points[p.fiber_of(be.from)]);
        from[0] -= 1;
        if (phase_key(be.to_cell, be.to_fiber) != lattice_residue(lcd.G, from)) {
          cocycle_ok = false;
          cocycle_detail = "boundary edge from node " + std::to_string(be.from);
          break;
        }
      }
      report.add(where + ": phase drops one time unit along every edge", cocycle_ok,
                 cocycle_detail);

      // Window membership matches the residue rule atom by atom.
      bool member_ok = true;
      for (std::size_t ai = 0; ai < comp.atoms.size() && member_ok; ++ai) {
        const Atom& atom = comp.atoms[ai];
        LVec key = phase_key(p.cell_of(atom.states[0]),
                             p.window_points[p.fiber_of(atom.states[0])]);
        for (int s : atom.states)
          member_ok = member_ok &&
                      phase_key(p.cell_of(s), p.window_points[p.fiber_of(s)]) == key;
      }
      report.add(where + ": atom membership matches the phase residue", member_ok);

      if (comp.kind == ComponentKind::Cycle) {
        // Successive atoms differ by one time unit; the period-step map
        // returns to the same residue.
        bool order_ok = true;
        LVec cur = detail::phase_vector(
            lcd, d, p.cell_of(comp.atoms[0].states[0]),
            p.window_points[p.fiber_of(comp.atoms[0].states[0])]);
        for (std::size_t ai = 0; ai < comp.atoms.size(); ++ai) {
          const Atom& atom = comp.atoms[ai];
          LVec key = phase_key(p.cell_of(atom.states[0]),
                               p.window_points[p.fiber_of(atom.states[0])]);
          order_ok = order_ok && key == lattice_residue(lcd.G, cur);
          cur[0] -= 1;
        }
        order_ok = order_ok &&
                   lattice_residue(lcd.G, cur) ==
                       phase_key(p.cell_of(comp.atoms[0].states[0]),
                                 p.window_points[p.fiber_of(comp.atoms[0].states[0])]);
        report.add(where + ": atoms advance one time unit per step and close up",
                   order_ok);

        bool np_ok = true;
        if (comp.atoms[0].n_p == 1) {
          for (const auto& atom : comp.atoms) {
            std::map<int, int> per_cell;
            for (int s : atom.states) per_cell[p.cell_of(s)]++;
            for (const auto& [cell, count] : per_cell) np_ok = np_ok && count == 1;
          }
        }
        report.add(where + ": trivial coset subgroup gives one fiber per cell", np_ok);

        bool measure_ok = true;
        for (const auto& atom : comp.atoms) {
          if (!atom.measure_finite) continue;
          Rat projected = rep.base_atoms[atom.base_atom].measure;
          measure_ok = measure_ok && atom.measure == projected;
          Rat windowed = 0;
          for (int s : atom.states) windowed += p.lifted_measure(s);
          measure_ok = measure_ok && windowed <= atom.measure;
        }
        report.add(where + ": finite atom measures equal their projections",
                   measure_ok);
      } else {
        bool pos_ok = true;
        for (std::size_t ai = 0; ai + 1 < comp.atoms.size(); ++ai)
          pos_ok = pos_ok &&
                   comp.atoms[ai].chain_position < comp.atoms[ai + 1].chain_position;
        report.add(where + ": chain positions strictly increase", pos_ok);

        // Each edge advances the chain position by exactly one.
        bool shift_ok = true;
        std::map<LVec, std::int64_t> pos_of_key;
        LVec ref = detail::phase_vector(
            lcd, d, p.cell_of(comp.atoms[0].states[0]),
            p.window_points[p.fiber_of(comp.atoms[0].states[0])]);
        for (const auto& atom : comp.atoms)
          pos_of_key[phase_key(p.cell_of(atom.states[0]),
                               p.window_points[p.fiber_of(atom.states[0])])] =
              atom.chain_position;
        for (const auto& atom : comp.atoms)
          for (int u : atom.states)
            for (int v : p.graph.adj[u]) {
              auto it = pos_of_key.find(
                  phase_key(p.cell_of(v), p.window_points[p.fiber_of(v)]));
              if (it != pos_of_key.end())
                shift_ok = shift_ok && it->second == atom.chain_position + 1;
            }
        report.add(where + ": every step advances the chain position by one",
                   shift_ok);
      }
    }
  }
  return report;
}

/// Checks that the projection of the product tail partition is exactly the
/// base tail partition: each atom projects into its base atom (onto it for
/// finite fibers, where no window truncation exists), every base atom is
/// covered, and transient cells stay outside all atoms.
inline CheckReport project_atoms(const ProductSystem& p,
                                 const DecompositionReport& rep) {
  CheckReport report;
  report.title = "projection of tail atoms";

  std::set<int> transient_cells(rep.transient_cells.begin(), rep.transient_cells.end());
  std::vector<bool> base_atom_hit(rep.base_atoms.size(), false);

  bool contain_ok = true, onto_ok = true, clean_ok = true;
  std::string contain_detail, onto_detail;
  for (std::size_t ci = 0; ci < rep.components.size(); ++ci)
    for (std::size_t ai = 0; ai < rep.components[ci].atoms.size(); ++ai) {
      const Atom& atom = rep.components[ci].atoms[ai];
      std::set<int> projected;
      for (int s : atom.states) {
        projected.insert(p.cell_of(s));
        clean_ok = clean_ok && !transient_cells.count(p.cell_of(s));
      }
      base_atom_hit[atom.base_atom] = true;
      const auto& cells = rep.base_atoms[atom.base_atom].cells;
      std::set<int> target(cells.begin(), cells.end());
      bool inside =
          std::includes(target.begin(), target.end(), projected.begin(), projected.end());
      if (!inside && contain_ok) {
        contain_ok = false;
        contain_detail = detail::atom_label(ci, ai) + " leaves its base atom";
      }
      bool onto = projected == target;
      if (!onto && onto_ok) {
        onto_ok = false;
        onto_detail = detail::atom_label(ci, ai) + " misses part of its base atom" +
                      (p.fiber.kind == FiberKind::Lattice
                           ? " (window may be too small)"
                           : "");
      }
    }

  report.add("each atom projects inside a single base atom", contain_ok, contain_detail);
  report.add("each atom projects onto its full base atom", onto_ok, onto_detail);
  report.add("no atom meets a transient cell", clean_ok);

  bool all_hit = true;
  std::string hit_detail;
  for (std::size_t b = 0; b < base_atom_hit.size(); ++b)
    if (!base_atom_hit[b]) {
      all_hit = false;
      hit_detail = "base atom " + std::to_string(b) + " carries no product atom";
      break;
    }
  report.add("every base atom carries at least one product atom", all_hit, hit_detail);
  return report;
}

}  // namespace tailatlas
