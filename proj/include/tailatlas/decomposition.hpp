#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tailatlas/lattice_algebra.hpp"
#include "tailatlas/product_system.hpp"

namespace tailatlas {

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// One atom of the tail partition. For finite fibers `states` is the complete
/// state list; for lattice fibers it is the window-restricted membership and
/// the component carries the algebraic rule generating the rest.
struct Atom {
  std::vector<int> states;       // product node ids, ascending
  long long n_p = 0;             // per-cell fiber multiplicity; -1 = infinite
  bool measure_finite = true;
  Rat measure;                   // meaningful when measure_finite
  int base_atom = -1;            // index into DecompositionReport::base_atoms
  long long chain_position = 0;  // chains: the atom's position t (T sends t to t+1)
};

enum class ComponentKind { Cycle, Chain };

inline const char* to_string(ComponentKind k) {
  return k == ComponentKind::Cycle ? "cycle" : "chain";
}

/// One ergodic component: either an m-cycle of atoms (T permutes them
/// cyclically, T^m fixes each) or a chain (T shifts an integer-indexed family
/// of atoms, never returning).
struct Component {
  ComponentKind kind = ComponentKind::Cycle;
  long long period = 0;                  // m; 0 for chains
  long long n_e = 0;                     // fiber multiplicity over the component; -1 = infinite
  bool conservative = false;
  std::string conservativity_rule;       // which classification convention fired
  std::vector<Atom> atoms;               // cycles: image order; chains: by position
  int base_class = -1;                   // index into closed base class list

  // Lattice only: algebraic description making the window data complete.
  bool lattice = false;
  std::vector<Rat> drift;                // mean displacement per step, exact
  std::vector<FiberVec> coset_subgroup;  // H: fiber subgroup whose cosets are the atoms
  bool translation_family = false;       // one representative of infinitely many siblings
  std::vector<FiberVec> family_basis;    // translations generating the siblings
};

/// Tail atom of the base system alone: a cyclic class of a closed class.
struct BaseAtom {
  int closed_class = 0;   // index among closed classes, by smallest cell
  int cyclic_index = 0;   // position in the image order
  std::vector<int> cells;
  Rat measure;
};

struct ExactnessCertificate {
  int component = 0;
  int atom = 0;
  std::string method;      // "matrix-power" or "cycle-algebra"
  bool primitive = false;
  long long power = 0;     // smallest n with contraction below tolerance,
                           // counted in powers of the period-step matrix
  double norm = 0.0;       // achieved bound on ||M^n - limit projector||_inf
};

struct DecompositionReport {
  std::vector<Component> components;
  std::vector<BaseAtom> base_atoms;
  std::vector<int> transient_cells;  // base cells outside every closed class
  std::vector<ExactnessCertificate> certificates;

  // Lattice windows cut translate families off at the boundary. Components
  // that are fiber translates of a listed one but only partially visible are
  // not listed; their window states and count are recorded here instead.
  std::vector<int> suppressed_states;
  long long suppressed_components = 0;
};

// ---------------------------------------------------------------------------
// Base-side analysis shared by several entry points
// ---------------------------------------------------------------------------

struct BaseClasses {
  std::vector<std::vector<int>> closed;  // cell lists, each ascending; ordered by smallest cell
  std::vector<std::int64_t> period;
  std::vector<std::vector<int>> cyclic_index_of_cell;  // per class, aligned with closed[k]
  std::vector<int> transient_cells;
};

inline BaseClasses analyze_base_classes(const SymbolicBaseSystem& base) {
  BaseClasses out;
  Digraph g = base.graph();
  SccResult scc = strongly_connected_components(g);
  std::vector<bool> closed = closed_components(g, scc);
  std::vector<std::vector<int>> by_comp(scc.count);
  for (int c = 0; c < base.size(); ++c) by_comp[scc.comp[c]].push_back(c);
  std::vector<int> order;
  for (int k = 0; k < scc.count; ++k)
    if (closed[k])
      order.push_back(k);
    else
      for (int c : by_comp[k]) out.transient_cells.push_back(c);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return by_comp[a][0] < by_comp[b][0]; });
  std::sort(out.transient_cells.begin(), out.transient_cells.end());
  for (int k : order) {
    std::vector<int>& nodes = by_comp[k];
    std::int64_t p = class_period(g, nodes);
    if (p == 0) p = 1;  // single node with self loop is handled by class_period
    std::vector<int> cyc = cyclic_classes(g, nodes, p);
    out.closed.push_back(nodes);
    out.period.push_back(p);
    out.cyclic_index_of_cell.push_back(cyc);
  }
  return out;
}

inline std::vector<BaseAtom> base_atoms_of(const SymbolicBaseSystem& base,
                                           const BaseClasses& cls) {
  std::vector<BaseAtom> atoms;
  for (std::size_t k = 0; k < cls.closed.size(); ++k) {
    for (int t = 0; t < cls.period[k]; ++t) {
      BaseAtom a;
      a.closed_class = static_cast<int>(k);
      a.cyclic_index = t;
      a.measure = 0;
      for (std::size_t i = 0; i < cls.closed[k].size(); ++i)
        if (cls.cyclic_index_of_cell[k][i] == t) {
          a.cells.push_back(cls.closed[k][i]);
          a.measure += base.cell_measure[cls.closed[k][i]];
        }
      atoms.push_back(std::move(a));
    }
  }
  return atoms;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

namespace detail {

/// Everything the lattice classification needs about one closed base class:
/// the cycle group G in Z^{1+d}, its time step p, the fiber subgroup H, the
/// per-p-step displacement class delta, and the atom period m (0 = chain).
struct LatticeClassData {
  IntLattice G;          // dim 1 + d
  IntLattice G_aug;      // G + Z e_1 (components = cosets of this)
  IntLattice H;          // fiber part, dim d
  Int p = 1;             // base class period
  LVec delta;            // d entries; displacement of some closed p-walk
  std::optional<Int> order;  // order of delta mod H; nullopt = chain
  std::vector<std::int64_t> ref_len;   // BFS reference path lengths per cell
  std::vector<FiberVec> ref_disp;      // BFS reference displacements per cell
};

inline LatticeClassData lattice_class_data(const SymbolicBaseSystem& base,
                                           const FiberAction& action, int d,
                                           const std::vector<int>& nodes) {
  LatticeClassData out;
  auto gens = cycle_group_generators(base, action.displacements, d, nodes,
                                     &out.ref_len, &out.ref_disp);
  out.G = lattice_from_generators(1 + d, gens);
  {
    auto aug = out.G.rows;
    LVec e1(1 + d, Int(0));
    e1[0] = 1;
    aug.push_back(e1);
    out.G_aug = lattice_from_generators(1 + d, aug);
  }
  std::vector<LVec> h_rows;
  out.delta.assign(d, Int(0));
  bool have_p = false;
  for (int k = 0; k < out.G.rank(); ++k) {
    if (out.G.pivot_col[k] == 0) {
      out.p = out.G.rows[k][0];
      for (int j = 0; j < d; ++j) out.delta[j] = out.G.rows[k][1 + j];
      have_p = true;
    } else {
      h_rows.push_back(LVec(out.G.rows[k].begin() + 1, out.G.rows[k].end()));
    }
  }
  out.H = lattice_from_generators(d, h_rows);
  if (!have_p) {
    // A closed strongly connected class always has closed walks, so the time
    // coordinate always carries a pivot. Guard anyway.
    out.p = 1;
  }
  out.order = coset_order(out.H, out.delta);
  return out;
}

/// Phase of a product state relative to the class reference: the class of
/// (-len(c), i - disp(c)) in Z^{1+d}. One product step lowers the phase by
/// e_1 modulo G, so atoms are the fibers of the residue of the phase mod G.
inline LVec phase_vector(const LatticeClassData& lcd, int d, int cell, const FiberVec& i) {
  LVec v(1 + d);
  v[0] = Int(-lcd.ref_len[cell]);
  for (int j = 0; j < d; ++j) v[1 + j] = Int(i[j] - lcd.ref_disp[cell][j]);
  return v;
}

/// Chain position: the unique integer t with phase == ref_phase - t*e_1
/// modulo G. Callers guarantee both phases sit in the same component and the
/// component is a chain (so e_1 is independent of G over Q and t is unique).
inline std::int64_t chain_position(const LatticeClassData& lcd, const LVec& phase,
                                   const LVec& ref_phase) {
  std::vector<LVec> rows;
  LVec e1(phase.size(), Int(0));
  e1[0] = 1;
  rows.push_back(e1);
  for (const auto& r : lcd.G.rows) rows.push_back(r);
  LVec target = lvec_sub(ref_phase, phase);
  auto sol = solve_rational(rows, target, static_cast<int>(phase.size()));
  // sol must exist with integral first coefficient by the membership check
  // already performed; a failure here is an internal inconsistency.
  if (!sol)
    throw Error(ErrorKind::InvalidInput, "internal: chain position unsolvable");
  const Rat& t = (*sol)[0];
  if (boost::multiprecision::denominator(t) != 1)
    throw Error(ErrorKind::InvalidInput, "internal: chain position not integral");
  return boost::multiprecision::numerator(t).convert_to<std::int64_t>();
}

}  // namespace detail

/// Computes the tail decomposition of the product system: ergodic components
/// split into atoms, with kinds, periods, multiplicities, exact measures and
/// links to the base tail atoms. Pure graph work for finite fibers; exact
/// cycle-group algebra plus the window for lattice fibers.
inline DecompositionReport decompose(const ProductSystem& p) {
  DecompositionReport rep;
  const SymbolicBaseSystem& base = p.base;
  BaseClasses cls = analyze_base_classes(base);
  rep.base_atoms = base_atoms_of(base, cls);
  rep.transient_cells = cls.transient_cells;

  // index of the base atom holding a given cell (transient cells: -1)
  std::vector<int> base_atom_of_cell(base.size(), -1);
  for (std::size_t a = 0; a < rep.base_atoms.size(); ++a)
    for (int c : rep.base_atoms[a].cells) base_atom_of_cell[c] = static_cast<int>(a);
  // first base atom of each closed class (cyclic_index 0)
  std::vector<int> class_first_atom(cls.closed.size(), 0);
  for (std::size_t a = 0; a < rep.base_atoms.size(); ++a)
    if (rep.base_atoms[a].cyclic_index == 0)
      class_first_atom[rep.base_atoms[a].closed_class] = static_cast<int>(a);

  if (p.fiber.kind == FiberKind::Finite) {
    SccResult scc = strongly_connected_components(p.graph);
    std::vector<bool> closed = closed_components(p.graph, scc);
    std::vector<std::vector<int>> by_comp(scc.count);
    for (int u = 0; u < p.graph.size(); ++u) by_comp[scc.comp[u]].push_back(u);
    std::vector<int> order;
    for (int k = 0; k < scc.count; ++k)
      if (closed[k]) order.push_back(k);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return by_comp[a][0] < by_comp[b][0]; });

    for (int k : order) {
      std::vector<int>& nodes = by_comp[k];
      Component comp;
      std::int64_t m = class_period(p.graph, nodes);
      if (m == 0) m = 1;
      comp.kind = ComponentKind::Cycle;
      comp.period = m;
      std::vector<int> cyc = cyclic_classes(p.graph, nodes, m);
      comp.atoms.resize(m);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        comp.atoms[cyc[i]].states.push_back(nodes[i]);
      for (auto& atom : comp.atoms) std::sort(atom.states.begin(), atom.states.end());

      // Base class of the component: the class of any member cell.
      int c0 = p.cell_of(nodes[0]);
      for (std::size_t b = 0; b < cls.closed.size(); ++b)
        if (std::find(cls.closed[b].begin(), cls.closed[b].end(), c0) != cls.closed[b].end())
          comp.base_class = static_cast<int>(b);
      std::int64_t p_base = cls.period[comp.base_class];

      for (auto& atom : comp.atoms) {
        // Per-cell multiplicity: count states over the first cell present.
        std::map<int, long long> per_cell;
        for (int s : atom.states) per_cell[p.cell_of(s)]++;
        atom.n_p = per_cell.begin()->second;
        atom.base_atom = base_atom_of_cell[p.cell_of(atom.states[0])];
        atom.measure = 0;
        for (int s : atom.states) atom.measure += p.lifted_measure(s);
        atom.measure_finite = true;
      }
      comp.n_e = comp.atoms[0].n_p * (m / p_base);
      comp.conservative = true;
      comp.conservativity_rule = "atoms of finite measure force returns";
      rep.components.push_back(std::move(comp));
    }
    return rep;
  }

  // Lattice fibers: exact cycle-group classification per closed base class,
  // with the window supplying the explicit membership lists.
  const int d = p.fiber.dimension;
  for (std::size_t b = 0; b < cls.closed.size(); ++b) {
    const std::vector<int>& nodes = cls.closed[b];
    detail::LatticeClassData lcd =
        detail::lattice_class_data(base, p.action, d, nodes);
    std::vector<Rat> drift = class_drift(base, p.action, d, nodes);
    bool drift_zero = true;
    for (const auto& x : drift) drift_zero = drift_zero && x == 0;

    bool is_chain = !lcd.order.has_value();
    Int m_int = is_chain ? Int(0) : lcd.p * *lcd.order;
    long long m = m_int.convert_to<long long>();
    long long n_p = lcd.H.rank() == 0 ? 1 : -1;

    // Group window states over this class by component residue, then by
    // atom residue within each component.
    std::set<int> cell_set(nodes.begin(), nodes.end());
    std::map<LVec, std::map<LVec, std::vector<int>>> comps;
    std::map<LVec, LVec> phase_of_atom;  // a representative phase per atom key
    for (int c = 0; c < base.size(); ++c) {
      if (!cell_set.count(c)) continue;
      for (int fi = 0; fi < p.fiber_count; ++fi) {
        LVec phase = detail::phase_vector(lcd, d, c, p.window_points[fi]);
        LVec comp_key = lattice_residue(lcd.G_aug, phase);
        LVec atom_key = lattice_residue(lcd.G, phase);
        comps[comp_key][atom_key].push_back(p.node(c, fi));
        phase_of_atom.emplace(atom_key, phase);
      }
    }

    // Sibling components related by fiber translation: detect whether the
    // displacement lattice H + Z delta has full rank.
    std::vector<LVec> proj_rows;
    for (const auto& r : lcd.G.rows) proj_rows.push_back(LVec(r.begin() + 1, r.end()));
    IntLattice proj = lattice_from_generators(d, proj_rows);
    bool family = proj.rank() < d;
    std::vector<FiberVec> family_basis;
    if (family) {
      std::set<int> pivots(proj.pivot_col.begin(), proj.pivot_col.end());
      for (int j = 0; j < d; ++j)
        if (!pivots.count(j)) {
          FiberVec v = fiber_vec();
          v[j] = 1;
          family_basis.push_back(v);
        }
    }

    // Family classes: components whose keys agree modulo fiber translations
    // are translates of one another. The window must show at least one
    // complete representative per family class.
    IntLattice G_fam;
    {
      auto rows = lcd.G_aug.rows;
      for (const auto& f : family_basis) {
        LVec r(1 + d, Int(0));
        for (int j = 0; j < d; ++j) r[1 + j] = Int(f[j]);
        rows.push_back(r);
      }
      G_fam = lattice_from_generators(1 + d, rows);
    }

    // Deterministic component order: by smallest node id inside.
    struct PendingComp {
      int smallest;
      LVec key;
      LVec fam_key;
      bool complete = true;
    };
    std::vector<PendingComp> comp_order;
    for (const auto& [key, atoms] : comps) {
      PendingComp pc;
      pc.smallest = p.node_count();
      for (const auto& [akey, states] : atoms)
        pc.smallest =
            std::min(pc.smallest, *std::min_element(states.begin(), states.end()));
      pc.key = key;
      pc.fam_key = lattice_residue(G_fam, key);
      if (!is_chain) {
        // Complete means every one of the m atom residues has window states.
        int best = p.node_count();
        LVec ref;
        for (const auto& [akey, states] : atoms) {
          int s = *std::min_element(states.begin(), states.end());
          if (s < best) {
            best = s;
            ref = akey;
          }
        }
        LVec cur = phase_of_atom[ref];
        for (long long t = 0; t < m && pc.complete; ++t) {
          pc.complete = atoms.count(lattice_residue(lcd.G, cur)) > 0;
          cur[0] -= 1;
        }
      }
      comp_order.push_back(std::move(pc));
    }
    std::sort(comp_order.begin(), comp_order.end(),
              [](const PendingComp& a, const PendingComp& b) {
                return a.smallest < b.smallest;
              });

    std::map<LVec, int> fam_members, fam_kept;
    for (const auto& pc : comp_order) fam_members[pc.fam_key]++;

    for (const auto& pc : comp_order) {
      auto& atom_map = comps[pc.key];
      bool keep = is_chain ? fam_kept[pc.fam_key] == 0 : pc.complete;
      if (!keep) {
        rep.suppressed_components++;
        for (const auto& [akey, states] : atom_map)
          rep.suppressed_states.insert(rep.suppressed_states.end(), states.begin(),
                                       states.end());
        continue;
      }
      fam_kept[pc.fam_key]++;
      Component comp;
      comp.lattice = true;
      comp.base_class = static_cast<int>(b);
      comp.drift = drift;
      comp.kind = is_chain ? ComponentKind::Chain : ComponentKind::Cycle;
      comp.period = is_chain ? 0 : m;
      comp.translation_family = family;
      comp.family_basis = family_basis;
      for (const auto& row : lcd.H.rows) {
        FiberVec v = fiber_vec();
        for (int j = 0; j < d; ++j) v[j] = row[j].convert_to<std::int64_t>();
        comp.coset_subgroup.push_back(v);
      }

      // Reference atom: the one holding the smallest node.
      LVec ref_key;
      {
        int best = p.node_count();
        for (const auto& [akey, states] : atom_map) {
          int s = *std::min_element(states.begin(), states.end());
          if (s < best) {
            best = s;
            ref_key = akey;
          }
        }
      }
      LVec ref_phase = phase_of_atom[ref_key];

      auto finish_atom = [&](const LVec& akey, long long position) {
        Atom atom;
        atom.states = atom_map[akey];
        std::sort(atom.states.begin(), atom.states.end());
        atom.n_p = n_p;
        atom.measure_finite = n_p == 1;
        atom.chain_position = position;
        // The atom's base cyclic class is read off the time coordinate of
        // its phase: cells c contribute exactly when len(c) = t mod p.
        int cell = p.cell_of(atom.states[0]);
        atom.base_atom = base_atom_of_cell[cell];
        if (atom.measure_finite)
          atom.measure = rep.base_atoms[atom.base_atom].measure;
        return atom;
      };

      if (!is_chain) {
        // Walk the image order: phase drops by e_1 each step.
        LVec cur = ref_phase;
        for (long long t = 0; t < m; ++t) {
          LVec akey = lattice_residue(lcd.G, cur);
          if (!atom_map.count(akey))
            throw Error(ErrorKind::InconclusiveWindow,
                        "window misses atom " + std::to_string(t) + " of an " +
                            std::to_string(m) + "-cycle; enlarge the window");
          comp.atoms.push_back(finish_atom(akey, t));
          cur[0] -= 1;
        }
        if (n_p == 1) {
          comp.n_e = m / lcd.p.convert_to<long long>();
          comp.conservative = true;
          comp.conservativity_rule = "atoms of finite measure force returns";
        } else {
          comp.n_e = -1;
          if (drift_zero && d <= 2) {
            comp.conservative = true;
            comp.conservativity_rule =
                "zero mean displacement recurs in dimension <= 2";
          } else if (drift_zero) {
            comp.conservative = false;
            comp.conservativity_rule =
                "transient regime: zero mean displacement does not force "
                "returns in dimension >= 3";
          } else {
            comp.conservative = false;
            comp.conservativity_rule = "nonzero mean displacement escapes";
          }
        }
      } else {
        std::vector<std::pair<std::int64_t, LVec>> positions;
        for (const auto& [akey, states] : atom_map)
          positions.push_back(
              {detail::chain_position(lcd, phase_of_atom[akey], ref_phase), akey});
        std::sort(positions.begin(), positions.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [t, akey] : positions)
          comp.atoms.push_back(finish_atom(akey, t));
        comp.n_e = -1;
        comp.conservative = false;
        comp.conservativity_rule = "chain: every window is eventually left for good";
      }
      rep.components.push_back(std::move(comp));
    }

    for (const auto& [fkey, members] : fam_members)
      if (members > 0 && fam_kept[fkey] == 0)
        throw Error(ErrorKind::InconclusiveWindow,
                    "no complete representative of a " +
                        std::to_string(m) + "-cycle component family is visible");
  }
  std::sort(rep.suppressed_states.begin(), rep.suppressed_states.end());
  return rep;
}

}  // namespace tailatlas
