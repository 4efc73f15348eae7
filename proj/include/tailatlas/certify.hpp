#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tailatlas/decomposition.hpp"

namespace tailatlas {

namespace detail {

using DMat = std::vector<std::vector<double>>;

inline DMat dmat_mul(const DMat& a, const DMat& b) {
  std::size_t n = a.size();
  DMat c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double aik = a[i][k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

inline DMat dmat_pow(DMat a, long long e) {
  std::size_t n = a.size();
  DMat r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1.0;
  while (e > 0) {
    if (e & 1) r = dmat_mul(r, a);
    e >>= 1;
    if (e) a = dmat_mul(a, a);
  }
  return r;
}

/// Upper bound on ||A - P||_inf where P is the rank-one limit projector:
/// P's rows are convex combinations of A's rows, so the worst row-to-row
/// L1 distance bounds the distance of any row to the limit row.
inline double row_spread(const DMat& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[i][k] - a[j][k]);
      worst = std::max(worst, s);
    }
  return worst;
}

}  // namespace detail

/// Produces one certificate per atom. Finite fibers: checks primitivity of
/// the period-step map restricted to the atom exactly on the graph, then
/// finds the smallest matrix power whose rows agree within `tolerance` in L1,
/// which bounds the distance to the limit projector. Lattice fibers: the atom
/// membership rule is an exact residue computation and the period-step map
/// fixes it by construction, so the certificate records the algebraic method
/// instead of a matrix power.
///
///// Errors: CertificationFailed when a claimed atom is not primitive under the
/// period-step map; SlowMixing when max_power is reached before contraction.
inline std::vector<ExactnessCertificate> certify_exactness(
    const ProductSystem& p, const DecompositionReport& rep,
    double tolerance = 1e-9, long long max_power = 10000) {
  std::vector<ExactnessCertificate> out;

  if (p.fiber.kind == FiberKind::Lattice) {
    for (std::size_t ci = 0; ci < rep.components.size(); ++ci)
      for (std::size_t ai = 0; ai < rep.components[ci].atoms.size(); ++ai) {
        ExactnessCertificate cert;
        cert.component = static_cast<int>(ci);
        cert.atom = static_cast<int>(ai);
        cert.method = "cycle-algebra";
        cert.primitive = true;
        cert.power = 0;
        cert.norm = 0.0;
        out.push_back(cert);
      }
    return out;
  }

  int n = p.node_count();
  detail::DMat step(n, std::vector<double>(n, 0.0));
  for (int u = 0; u < n; ++u) {
    int c = p.cell_of(u);
    for (int v : p.graph.adj[u])
      step[u][v] = to_double(p.base.transition[c][p.cell_of(v)]);
  }

  for (std::size_t ci = 0; ci < rep.components.size(); ++ci) {
    const Component& comp = rep.components[ci];
    long long m = comp.period;
    detail::DMat step_m = detail::dmat_pow(step, m);

    // Exact m-step adjacency for the primitivity check.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int u = 0; u < n; ++u) reach[u][u] = true;
    for (long long s = 0; s < m; ++s) {
      std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          if (reach[u][v])
            for (int w : p.graph.adj[v]) next[u][w] = true;
      reach = std::move(next);
    }

    for (std::size_t ai = 0; ai < comp.atoms.size(); ++ai) {
      const Atom& atom = comp.atoms[ai];
      ExactnessCertificate cert;
      cert.component = static_cast<int>(ci);
      cert.atom = static_cast<int>(ai);
      cert.method = "matrix-power";

      std::size_t k = atom.states.size();
      Digraph g(static_cast<int>(k));
      std::vector<int> pos(n, -1);
      for (std::size_t i = 0; i < k; ++i) pos[atom.states[i]] = static_cast<int>(i);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          if (reach[atom.states[i]][atom.states[j]])
            g.add_edge(static_cast<int>(i), static_cast<int>(j));

      SccResult scc = strongly_connected_components(g);
      std::vector<int> all(k);
      for (std::size_t i = 0; i < k; ++i) all[i] = static_cast<int>(i);
      bool connected = scc.count == 1;
      std::int64_t per = connected ? class_period(g, all) : 0;
      cert.primitive = connected && per == 1;
      if (!cert.primitive)
        throw Error(ErrorKind::CertificationFailed,
                    "period-step map on atom " +
                        std::to_string(ai) + " of component " + std::to_string(ci) +
                        (connected ? " has period " + std::to_string(per)
                                   : " is not strongly connected"));

      detail::DMat a(k, std::vector<double>(k, 0.0));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          a[i][j] = step_m[atom.states[i]][atom.states[j]];

      detail::DMat power = a;
      long long iter = 1;
      double spread = detail::row_spread(power);
      while (spread >= tolerance) {
        if (iter >= max_power)
          throw Error(ErrorKind::SlowMixing,
                      "atom " + std::to_string(ai) +
                          " of component " + std::to_string(ci) + " still at " +
                          std::to_string(spread) + " after " + std::to_string(iter) +
                          " powers");
        power = detail::dmat_mul(power, a);
        ++iter;
        spread = detail::row_spread(power);
      }
      cert.power = iter;
      cert.norm = spread;
      out.push_back(cert);
    }
  }
  return out;
}

}  // namespace tailatlas
