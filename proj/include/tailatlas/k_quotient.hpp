#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tailatlas/certify.hpp"
#include "tailatlas/checks.hpp"
#include "tailatlas/decomposition.hpp"
#include "tailatlas/product_system.hpp"

namespace tailatlas {

/// Invertible shift model with bounded memory: a state remembers the last
/// history_depth symbols plus the present one, the map pushes the present
/// into the history and draws a successor. The sub-algebra generated by the
/// present coordinate plays the role of the filtration seed: pushing the
/// state forward n times reveals n further history coordinates.
struct TwoSidedSystem {
  SymbolicBaseSystem base;
  int history_depth = 1;
  // Declares what the fiber action reads. Actions reading the successor
  // coordinate are not measurable with respect to the filtration seed and
  // cannot pass to the quotient.
  bool action_reads_future = false;
};

/// All valid words (x_{-k}, ..., x_0) with positive transition weight along
/// every consecutive pair, oldest coordinate first.
struct WordModel {
  int depth = 0;
  std::vector<std::vector<int>> words;
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> successors;  // by word id
  std::vector<Rat> weight;  // mu(x_{-k}) times the transition weights along the word
};

inline WordModel enumerate_words(const SymbolicBaseSystem& base, int depth) {
  if (depth < 1)
    throw Error(ErrorKind::InvalidInput, "history depth must be at least 1");
  WordModel wm;
  wm.depth = depth;
  std::vector<std::vector<int>> frontier;
  for (int c = 0; c < base.size(); ++c) frontier.push_back({c});
  for (int step = 0; step < depth; ++step) {
    std::vector<std::vector<int>> next;
    for (const auto& w : frontier)
      for (int d = 0; d < base.size(); ++d)
        if (base.transition[w.back()][d] > 0) {
          auto e = w;
          e.push_back(d);
          next.push_back(std::move(e));
        }
    frontier = std::move(next);
  }
  std::sort(frontier.begin(), frontier.end());
  wm.words = std::move(frontier);
  for (std::size_t i = 0; i < wm.words.size(); ++i)
    wm.index[wm.words[i]] = static_cast<int>(i);
  wm.successors.resize(wm.words.size());
  wm.weight.resize(wm.words.size());
  for (std::size_t i = 0; i < wm.words.size(); ++i) {
    const auto& w = wm.words[i];
    Rat wt = base.cell_measure[w[0]];
    for (int s = 0; s < depth; ++s) wt *= base.transition[w[s]][w[s + 1]];
    wm.weight[i] = wt;
    for (int d = 0; d < base.size(); ++d)
      if (base.transition[w.back()][d] > 0) {
        std::vector<int> e(w.begin() + 1, w.end());
        e.push_back(d);
        wm.successors[i].push_back(wm.index.at(e));
      }
  }
  return wm;
}

struct QuotientResult {
  SymbolicBaseSystem base;  // the one-sided quotient system
  CheckReport wellposed;
  long long word_count = 0;
};

/// Collapses the stored history, keeping the present coordinate: the class
/// map sends (history, present, fiber) to (present, fiber). Well-posedness
/// requires the fiber action to read only what survives the collapse.
inline QuotientResult build_quotient(const TwoSidedSystem& ts, const FiberSet& fiber,
                                     const FiberAction& action) {
  if (ts.action_reads_future)
    throw Error(ErrorKind::NotBMeasurable,
                "the fiber action reads the successor coordinate, "
                "which the filtration seed does not determine");
  QuotientResult out;
  out.base = ts.base;
  out.wellposed.title = "quotient well-posedness";

  WordModel wm = enumerate_words(ts.base, ts.history_depth);
  out.word_count = static_cast<long long>(wm.words.size());
  out.wellposed.add("stored histories follow positive transitions only", true,
                    std::to_string(wm.words.size()) + " valid words at depth " +
                        std::to_string(ts.history_depth));

  // The collapse must hit every cell and map transition weights unchanged:
  // the successor distribution of a word depends on its present coordinate
  // alone, which holds by construction and is re-checked here.
  std::vector<bool> hit(ts.base.size(), false);
  bool weights_ok = true;
  for (std::size_t i = 0; i < wm.words.size(); ++i) {
    int present = wm.words[i].back();
    hit[present] = true;
    std::map<int, int> successor_presents;
    for (int j : wm.successors[i]) successor_presents[wm.words[j].back()]++;
    for (int d = 0; d < ts.base.size(); ++d) {
      bool edge = ts.base.transition[present][d] > 0;
      bool seen = successor_presents.count(d) > 0;
      weights_ok = weights_ok && edge == seen && (!seen || successor_presents[d] == 1);
    }
  }
  bool onto = true;
  for (int c = 0; c < ts.base.size(); ++c) onto = onto && hit[c];
  out.wellposed.add("class map is onto every cell", onto);
  out.wellposed.add("successor weights depend on the present coordinate alone",
                    weights_ok);

  // The action is keyed on the present cell, which the class map preserves.
  bool keyed = !ts.action_reads_future;
  (void)action;
  (void)fiber;
  out.wellposed.add("fiber action is measurable for the filtration seed", keyed);
  return out;
}

namespace detail {

/// Groups item indices by key; returns class index per item.
template <class Key>
std::vector<int> classes_by_key(const std::vector<Key>& keys) {
  std::map<Key, int> ids;
  std::vector<int> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, fresh] = ids.emplace(keys[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  return out;
}

/// True when every fine class sits inside one coarse class.
inline bool refines(const std::vector<int>& fine, const std::vector<int>& coarse) {
  std::map<int, int> image;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    auto [it, fresh] = image.emplace(fine[i], coarse[i]);
    if (!fresh && it->second != coarse[i]) return false;
  }
  return true;
}

inline int class_count(const std::vector<int>& part) {
  return part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;
}

}  // namespace detail

/// Exhibits the filtration on the bounded-memory model: pushing forward n
/// times reveals the last n+1 stored coordinates, so the induced partitions
/// must form a strictly refining tower whose join separates all states. With
/// a fiber extension, the partition at stage n additionally recovers the
/// fiber position n steps in the past, and each stage must refine the lift
/// of the corresponding base partition.
inline CheckReport check_filtration_inclusions(const TwoSidedSystem& ts,
                                               const FiberSet* fiber = nullptr,
                                               const FiberAction* action = nullptr) {
  CheckReport report;
  report.title = "filtration inclusions";
  const int k = ts.history_depth;
  WordModel wm = enumerate_words(ts.base, k);

  // Base tower: stage n keys a word by its last n+1 coordinates.
  std::vector<std::vector<int>> stage(k + 1);
  for (int n = 0; n <= k; ++n) {
    std::vector<std::vector<int>> keys;
    for (const auto& w : wm.words)
      keys.push_back(std::vector<int>(w.end() - (n + 1), w.end()));
    stage[n] = detail::classes_by_key(keys);
  }
  for (int n = 1; n <= k; ++n) {
    bool nested = detail::refines(stage[n], stage[n - 1]);
    bool strict = detail::class_count(stage[n]) > detail::class_count(stage[n - 1]);
    report.add("stage " + std::to_string(n) + " refines stage " + std::to_string(n - 1),
               nested);
    report.add("stage " + std::to_string(n) + " refines stage " + std::to_string(n - 1) +
                   " strictly",
               strict,
               strict ? "" : "revealed coordinate is determined by the later ones");
  }
  report.add("join of the tower separates all stored histories",
             detail::class_count(stage[k]) == static_cast<int>(wm.words.size()));

  if (fiber == nullptr || action == nullptr) return report;

  // Fiber positions n steps back are recovered by undoing the stored
  // transitions; the action must be invertible for that.
  if (action->mode != ActionMode::Bijective)
    throw Error(ErrorKind::HypothesisNotMet,
                "recovering past fiber positions needs an "
                "invertible action");

  int fc;
  std::vector<FiberVec> points;
  if (fiber->kind == FiberKind::Finite) {
    fc = fiber->size;
  } else {
    ProductSystem tmp = build_product(ts.base, *fiber, *action);
    points = tmp.window_points;
    fc = static_cast<int>(points.size());
  }

  std::vector<std::vector<int>> inverse;  // finite only
  if (fiber->kind == FiberKind::Finite) {
    inverse.assign(ts.base.size(), std::vector<int>(fc));
    for (int c = 0; c < ts.base.size(); ++c)
      for (int i = 0; i < fc; ++i) inverse[c][action->maps[c][i]] = i;
  }

  // Product states: (word, fiber at the present time).
  struct FKey {
    std::vector<int> cells;
    std::vector<std::int64_t> fib;
    bool operator<(const FKey& o) const {
      return std::tie(cells, fib) < std::tie(o.cells, o.fib);
    }
  };
  std::vector<std::vector<int>> pstage(k + 1), plift(k + 1);
  for (int n = 0; n <= k; ++n) {
    std::vector<FKey> keys;
    std::vector<std::vector<int>> lift_keys;
    for (const auto& w : wm.words)
      for (int i = 0; i < fc; ++i) {
        FKey key;
        key.cells = std::vector<int>(w.end() - (n + 1), w.end());
        if (fiber->kind == FiberKind::Finite) {
          int j = i;
          for (int s = 0; s < n; ++s) j = inverse[w[k - s - 1]][j];
          key.fib = {j};
        } else {
          FiberVec v = points[i];
          for (int s = 0; s < n; ++s)
            for (int t = 0; t < fiber->dimension; ++t)
              v[t] -= action->displacements[w[k - s - 1]][t];
          key.fib.assign(v.begin(), v.begin() + fiber->dimension);
        }
        keys.push_back(std::move(key));
        lift_keys.push_back(std::vector<int>(w.end() - (n + 1), w.end()));
      }
    pstage[n] = detail::classes_by_key(keys);
    plift[n] = detail::classes_by_key(lift_keys);
  }
  for (int n = 1; n <= k; ++n)
    report.add("fiber stage " + std::to_string(n) + " refines fiber stage " +
                   std::to_string(n - 1),
               detail::refines(pstage[n], pstage[n - 1]));
  bool lifts_ok = true;
  for (int n = 0; n <= k; ++n)
    lifts_ok = lifts_ok && detail::refines(pstage[n], plift[n]);
  report.add("each fiber stage refines the lift of its base stage", lifts_ok);
  report.add("join of the fiber tower separates all product states",
             detail::class_count(pstage[k]) ==
                 static_cast<int>(wm.words.size()) * fc);
  return report;
}

struct KDecompositionReport {
  QuotientResult quotient;
  DecompositionReport report;  // decomposition of the quotient extension
  // Lifted atom sizes in the bounded-memory model: entry [c][a] counts the
  // (history, present, fiber) states over atom a of component c.
  std::vector<std::vector<long long>> lifted_counts;
  // Certificates of the quotient atoms; for the invertible extension they
  // certify mixing of the period-step map rather than exactness.
  std::vector<ExactnessCertificate> certificates;
  bool k_mixing = false;
};

/// Reduces the bounded-memory extension to its one-sided quotient, runs the
/// tail decomposition there, and lifts the outcome back through the class
/// map. The original extension has trivial tail (is K-mixing) exactly when
/// the quotient decomposition is a single atom covering everything.
inline KDecompositionReport decompose_k(const TwoSidedSystem& ts, const FiberSet& fiber,
                                        const FiberAction& action,
                                        double tolerance = 1e-9,
                                        long long max_power = 10000) {
  KDecompositionReport out;
  out.quotient = build_quotient(ts, fiber, action);
  ProductSystem q = build_product(out.quotient.base, fiber, action);
  out.report = decompose(q);
  out.certificates = certify_exactness(q, out.report, tolerance, max_power);
  for (auto& cert : out.certificates)
    cert.method = "K-mixing of T^m on atom (via exactness of quotient factor)";

  WordModel wm = enumerate_words(ts.base, ts.history_depth);
  std::vector<long long> words_with_present(ts.base.size(), 0);
  for (const auto& w : wm.words) words_with_present[w.back()]++;

  for (const auto& comp : out.report.components) {
    std::vector<long long> counts;
    for (const auto& atom : comp.atoms) {
      long long n = 0;
      for (int s : atom.states) n += words_with_present[q.cell_of(s)];
      counts.push_back(n);
    }
    out.lifted_counts.push_back(std::move(counts));
  }

  out.k_mixing = out.report.components.size() == 1 &&
                 out.report.components[0].atoms.size() == 1 &&
                 out.report.transient_cells.empty() &&
                 out.report.suppressed_components == 0 &&
                 static_cast<long long>(out.report.components[0].atoms[0].states.size()) ==
                     static_cast<long long>(q.node_count());
  return out;
}

}  // namespace tailatlas
