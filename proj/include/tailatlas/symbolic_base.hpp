#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailatlas/checks.hpp"
#include "tailatlas/errors.hpp"
#include "tailatlas/graph.hpp"
#include "tailatlas/rational.hpp"

namespace tailatlas {

/// Finite Markov presentation of the base map: cells of a Markov partition,
/// exact rational transition weights (conditional mass flow cell to cell),
/// and an exact measure per cell. The measure need not be normalized and,
/// when measure_preserving is set, must be stationary under the weights.
struct SymbolicBaseSystem {
  std::vector<std::string> cells;          // display names, unique
  std::vector<std::vector<Rat>> transition;  // row c: mass from c into c'
  std::vector<Rat> cell_measure;           // positive
  bool measure_preserving = false;

  int size() const { return static_cast<int>(cells.size()); }

  Rat total_measure() const {
    Rat t = 0;
    for (const auto& m : cell_measure) t += m;
    return t;
  }

  Digraph graph() const {
    Digraph g(size());
    for (int c = 0; c < size(); ++c)
      for (int d = 0; d < size(); ++d)
        if (transition[c][d] != 0) g.add_edge(c, d);
    return g;
  }
};

/// Interval realization of the symbolic system: the unit interval split at
/// breakpoints into cells, each cell mapped affinely onto a contiguous run
/// of cells. branch_image[c] = [first, last] cell indices, inclusive.
struct PiecewiseLinearRealization {
  std::vector<Rat> breakpoints;                  // size() + 1 of them, 0 .. 1
  std::vector<std::pair<int, int>> branch_image;

  int size() const { return static_cast<int>(branch_image.size()); }

  Rat cell_length(int c) const { return breakpoints[c + 1] - breakpoints[c]; }
  Rat image_start(int c) const { return breakpoints[branch_image[c].first]; }
  Rat image_end(int c) const { return breakpoints[branch_image[c].second + 1]; }
  Rat slope(int c) const {
    return (image_end(c) - image_start(c)) / cell_length(c);
  }

  /// Transition matrix induced by pushing normalized length through the
  /// branches: from c, the share landing in c' is len(c') / len(image(c)).
  std::vector<std::vector<Rat>> induced_matrix() const {
    std::vector<std::vector<Rat>> m(size(), std::vector<Rat>(size(), Rat(0)));
    for (int c = 0; c < size(); ++c) {
      Rat ilen = image_end(c) - image_start(c);
      for (int d = branch_image[c].first; d <= branch_image[c].second; ++d)
        m[c][d] = cell_length(d) / ilen;
    }
    return m;
  }
};

struct BaseValidation {
  CheckReport report;
  bool irreducible = false;
  std::int64_t period = 0;           // meaningful when irreducible
  bool exactness_candidate = false;  // irreducible and aperiodic
  int closed_class_count = 0;
  std::vector<int> scc_of_cell;
  std::vector<bool> scc_closed;
};

/// Runs every structural invariant, reporting each as its own pass/fail item.
/// Classification (irreducible or not, period, exactness candidacy) is
/// computed regardless of invariant failures so a report is always complete.
inline BaseValidation validate_base(
    const SymbolicBaseSystem& sys,
    const PiecewiseLinearRealization* realization = nullptr) {
  BaseValidation out;
  CheckReport& rep = out.report;
  rep.title = "base system validation";
  const int n = sys.size();

  bool shape_ok = n > 0 && sys.transition.size() == static_cast<std::size_t>(n) &&
                  sys.cell_measure.size() == static_cast<std::size_t>(n);
  for (const auto& row : sys.transition)
    shape_ok = shape_ok && row.size() == static_cast<std::size_t>(n);
  rep.add("shape", shape_ok, shape_ok ? "" : "matrix/measure sizes disagree");
  if (!shape_ok) return out;

  {
    bool unique = true;
    for (int i = 0; i < n && unique; ++i)
      for (int j = i + 1; j < n; ++j)
        if (sys.cells[i] == sys.cells[j]) { unique = false; break; }
    rep.add("cell names unique", unique);
  }

  for (int c = 0; c < n; ++c) {
    Rat row_sum = 0;
    bool nonneg = true;
    for (int d = 0; d < n; ++d) {
      if (sys.transition[c][d] < 0) nonneg = false;
      row_sum += sys.transition[c][d];
    }
    if (!nonneg)
      rep.add("row nonnegative: " + sys.cells[c], false, "negative entry");
    if (row_sum != 1)
      rep.add("row sum: " + sys.cells[c], false,
              "sums to " + format_rational(row_sum) + ", expected 1");
  }
  rep.add("rows stochastic", rep.all_passed());

  {
    bool pos = true;
    for (const auto& m : sys.cell_measure) pos = pos && m > 0;
    rep.add("cell measures positive", pos);
  }

  if (sys.measure_preserving) {
    bool stat = true;
    std::string detail;
    for (int d = 0; d < n; ++d) {
      Rat pushed = 0;
      for (int c = 0; c < n; ++c) pushed += sys.cell_measure[c] * sys.transition[c][d];
      if (pushed != sys.cell_measure[d]) {
        stat = false;
        detail = "cell " + sys.cells[d] + ": pushed " + format_rational(pushed) +
                 " vs " + format_rational(sys.cell_measure[d]);
        break;
      }
    }
    rep.add("measure stationary", stat, detail);
  }

  Digraph g = sys.graph();
  SccResult scc = strongly_connected_components(g);
  std::vector<bool> closed = closed_components(g, scc);
  out.scc_of_cell = scc.comp;
  out.scc_closed = closed;
  for (bool c : closed) out.closed_class_count += c ? 1 : 0;
  out.irreducible = scc.count == 1;
  if (out.irreducible) {
    std::vector<int> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = i;
    out.period = class_period(g, nodes);
    out.exactness_candidate = out.period == 1;
  }
  rep.add("classified",
          true,
          out.irreducible
              ? ("irreducible, period " + std::to_string(out.period) +
                 (out.exactness_candidate ? ", exactness candidate" : ""))
              : ("reducible, " + std::to_string(out.closed_class_count) +
                 " closed classes of " + std::to_string(scc.count)));

  if (realization != nullptr) {
    const auto& r = *realization;
    bool ok = r.size() == n && r.breakpoints.size() == static_cast<std::size_t>(n + 1);
    rep.add("realization shape", ok);
    if (ok) {
      bool increasing = r.breakpoints.front() == 0 && r.breakpoints.back() == 1;
      for (int c = 0; c < n; ++c)
        increasing = increasing && r.breakpoints[c] < r.breakpoints[c + 1];
      rep.add("breakpoints strictly increasing on [0,1]", increasing);

      bool images_ok = true;
      for (int c = 0; c < n; ++c) {
        auto [a, b] = r.branch_image[c];
        images_ok = images_ok && 0 <= a && a <= b && b < n;
      }
      rep.add("branch images are cell runs", images_ok);

      if (increasing && images_ok) {
        auto induced = r.induced_matrix();
        bool match = true;
        std::string detail;
        for (int c = 0; c < n && match; ++c)
          for (int d = 0; d < n; ++d)
            if (induced[c][d] != sys.transition[c][d]) {
              match = false;
              detail = "entry (" + sys.cells[c] + "," + sys.cells[d] + "): induced " +
                       format_rational(induced[c][d]) + " vs " +
                       format_rational(sys.transition[c][d]);
              break;
            }
        rep.add("induced matrix equals transition matrix", match, detail);

        bool expanding = true;
        for (int c = 0; c < n; ++c) expanding = expanding && r.slope(c) >= 1;
        rep.add("branches expanding", expanding);
      }
    }
  }
  return out;
}

/// Derives the canonical interval realization: breakpoints proportional to
/// cell measures, each branch spanning the contiguous run of cells its row
/// charges. Fails when a row's support is not contiguous or the weights are
/// not proportional to target cell lengths (no affine branch can do that).
inline PiecewiseLinearRealization derive_realization(const SymbolicBaseSystem& sys) {
  const int n = sys.size();
  PiecewiseLinearRealization r;
  Rat total = sys.total_measure();
  r.breakpoints.assign(n + 1, Rat(0));
  for (int c = 0; c < n; ++c)
    r.breakpoints[c + 1] = r.breakpoints[c] + sys.cell_measure[c] / total;
  r.breakpoints[n] = 1;
  r.branch_image.resize(n);
  for (int c = 0; c < n; ++c) {
    int first = -1, last = -1;
    for (int d = 0; d < n; ++d) {
      if (sys.transition[c][d] == 0) continue;
      if (first == -1) first = d;
      if (first != -1 && last != -1 && d != last + 1)
        throw Error(ErrorKind::Unsupported,
                    "row support of cell " + sys.cells[c] +
                        " is not contiguous, no affine realization");
      last = d;
    }
    if (first == -1)
      throw Error(ErrorKind::InvalidInput, "cell " + sys.cells[c] + " has empty row");
    r.branch_image[c] = {first, last};
  }
  auto induced = r.induced_matrix();
  for (int c = 0; c < n; ++c)
    for (int d = 0; d < n; ++d)
      if (induced[c][d] != sys.transition[c][d])
        throw Error(ErrorKind::Unsupported,
                    "weights of cell " + sys.cells[c] +
                        " are not proportional to image cell lengths, "
                        "no affine realization");
  return r;
}

/// One application of the realized map. The point must lie strictly inside a
/// cell: landing on a breakpoint is a genuine singularity of the symbolic
/// coding and is reported as such rather than resolved by a tie-break.
struct StepResult {
  double image;
  int cell;
};

inline StepResult step_base(const PiecewiseLinearRealization& r, double x) {
  const int n = r.size();
  if (x < 0.0 || x > 1.0)
    throw Error(ErrorKind::InvalidInput, "point outside [0,1]");
  for (int c = 0; c <= n; ++c)
    if (x == to_double(r.breakpoints[c]))
      throw Error(ErrorKind::SingularPoint,
                  "point sits on breakpoint " + std::to_string(c));
  int lo = 0, hi = n - 1;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (x > to_double(r.breakpoints[mid]))
      lo = mid;
    else
      hi = mid - 1;
  }
  const int c = lo;
  double a = to_double(r.breakpoints[c]);
  double s = to_double(r.image_start(c));
  double slope = to_double(r.slope(c));
  return {s + (x - a) * slope, c};
}

}  // namespace tailatlas
