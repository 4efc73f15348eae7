#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

namespace tailatlas {

/// Directed graph on 0..n-1 with adjacency lists. Small and dense enough
/// here that we never need anything fancier.
struct Digraph {
  std::vector<std::vector<int>> adj;

  explicit Digraph(int n = 0) : adj(n) {}
  int size() const { return static_cast<int>(adj.size()); }
  void add_edge(int u, int v) { adj[u].push_back(v); }
};

/// Strongly connected components, iterative Tarjan. Returns component id per
/// node; ids are in reverse topological order (an edge u->v across components
/// has comp[u] > comp[v]).
struct SccResult {
  std::vector<int> comp;
  int count = 0;
};

inline SccResult strongly_connected_components(const Digraph& g) {
  const int n = g.size();
  SccResult res;
  res.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0), stack;
  std::vector<std::pair<int, std::size_t>> call;
  int next_index = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& [u, ei] = call.back();
      if (ei == 0) {
        index[u] = low[u] = next_index++;
        stack.push_back(u);
        on_stack[u] = 1;
      }
      bool descended = false;
      while (ei < g.adj[u].size()) {
        int v = g.adj[u][ei++];
        if (index[v] == -1) {
          call.push_back({v, 0});
          descended = true;
          break;
        }
        if (on_stack[v]) low[u] = std::min(low[u], index[v]);
      }
      if (descended) continue;
      if (low[u] == index[u]) {
        while (true) {
          int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          res.comp[w] = res.count;
          if (w == u) break;
        }
        ++res.count;
      }
      int done = u;
      call.pop_back();
      if (!call.empty()) {
        int parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return res;
}

/// A component is closed when no edge leaves it. Closed components are the
/// recurrent classes; everything else is transient.
inline std::vector<bool> closed_components(const Digraph& g, const SccResult& scc) {
  std::vector<bool> closed(scc.count, true);
  for (int u = 0; u < g.size(); ++u)
    for (int v : g.adj[u])
      if (scc.comp[u] != scc.comp[v]) closed[scc.comp[u]] = false;
  return closed;
}

/// Period of one strongly connected node set: gcd over edges u->v inside the
/// set of (depth[u] + 1 - depth[v]) for any BFS depth assignment. nodes must
/// induce a strongly connected subgraph.
inline std::int64_t class_period(const Digraph& g, const std::vector<int>& nodes) {
  if (nodes.empty()) return 0;
  std::vector<int> in_set(g.size(), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) in_set[nodes[k]] = static_cast<int>(k);
  std::vector<std::int64_t> depth(nodes.size(), -1);
  std::queue<int> q;
  depth[0] = 0;
  q.push(nodes[0]);
  std::int64_t g_acc = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.adj[u]) {
      if (in_set[v] < 0) continue;
      if (depth[in_set[v]] == -1) {
        depth[in_set[v]] = depth[in_set[u]] + 1;
        q.push(v);
      } else {
        g_acc = std::gcd(g_acc, depth[in_set[u]] + 1 - depth[in_set[v]]);
      }
    }
  }
  // A strongly connected set with a single node and no self loop has no
  // cycle at all; callers treat period 0 as "no cycle".
  return g_acc < 0 ? -g_acc : g_acc;
}

/// Cyclic classes of a strongly connected node set with period m: BFS depth
/// mod m. Class index 0 contains nodes[0]; class j+1 is the one-step image
/// of class j.
inline std::vector<int> cyclic_classes(const Digraph& g, const std::vector<int>& nodes,
                                       std::int64_t m) {
  std::vector<int> in_set(g.size(), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) in_set[nodes[k]] = static_cast<int>(k);
  std::vector<std::int64_t> depth(nodes.size(), -1);
  std::queue<int> q;
  depth[0] = 0;
  q.push(nodes[0]);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.adj[u]) {
      if (in_set[v] < 0 || depth[in_set[v]] != -1) continue;
      depth[in_set[v]] = depth[in_set[u]] + 1;
      q.push(v);
    }
  }
  std::vector<int> cls(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k)
    cls[k] = static_cast<int>(((depth[k] % m) + m) % m);
  return cls;
}

}  // namespace tailatlas
