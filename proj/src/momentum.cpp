#include "levypw/evaluator.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <vector>

namespace levypw {

// Exact equilibrium value through momentum space. A spanning tree fixes the
// dependent edge momenta; free edges (plus one external edge joining the two
// roots) carry independent mode sums. The time integrals collapse to a sum
// over linear extensions of the vertex depth order, with one resolvent factor
// per adjacent pair: the inverse of the summed dispersion of the edges
// crossing that gap.
Field equilibrium_lag_field_momentum(const SimplifiedGraph& g, const CumulantSet& cums,
                                     const Lattice& lat) {
  if (g.has_init_leaf())
    throw ConfigError("momentum path needs an equilibrium graph without init leaves");
  int n = g.n_roots;
  if (n < 1 || n > 2) throw ConfigError("momentum path handles 1 or 2 roots");
  int V = g.n_vertices();
  int I = V - n;
  if (I > 6) throw NumericError("momentum path vertex cap exceeded");

  double cumfac = 1;
  for (const auto& v : g.vertices)
    if (v.kind == SimplifiedGraph::VK::Empty) {
      if (v.legs > cums.max_order())
        throw ConfigError("cumulant set too short for a block of size " +
                          std::to_string(v.legs));
      cumfac *= cums(v.legs);
    }

  struct E {
    int from, to;
    bool ext;
  };
  std::vector<E> edges;
  for (const auto& e : g.edges) edges.push_back({e.from, e.to, false});
  if (n == 2) edges.push_back({0, 1, true});

  // spanning tree over the non-external edges
  std::vector<int> parent(V, -1), parent_edge(V, -1), depth(V, 0), seen(V, 0);
  {
    std::vector<int> queue = {0};
    seen[0] = 1;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int v = queue[qi];
      for (int e = 0; e < (int)edges.size(); ++e) {
        if (edges[e].ext) continue;
        int o = -1;
        if (edges[e].from == v) o = edges[e].to;
        if (edges[e].to == v) o = edges[e].from;
        if (o >= 0 && !seen[o]) {
          seen[o] = 1;
          parent[o] = v;
          parent_edge[o] = e;
          depth[o] = depth[v] + 1;
          queue.push_back(o);
        }
      }
    }
    for (int v = 0; v < V; ++v)
      if (!seen[v]) throw ConfigError("momentum path needs a connected graph");
  }
  std::vector<char> in_tree(edges.size(), 0);
  for (int v = 0; v < V; ++v)
    if (parent_edge[v] >= 0) in_tree[parent_edge[v]] = 1;

  std::vector<int> free_edges;
  for (int e = 0; e < (int)edges.size(); ++e)
    if (!in_tree[e]) free_edges.push_back(e);
  int f = (int)free_edges.size();
  if (f > 4) throw NumericError("momentum path loop cap exceeded");

  // coefficient of free momentum j on each edge: the free edge itself, plus
  // the return flow along the tree path from its head back to its tail
  std::vector<std::vector<int>> coef(edges.size(), std::vector<int>(f, 0));
  for (int j = 0; j < f; ++j) {
    int fe = free_edges[j];
    coef[fe][j] = 1;
    auto climb = [&](int v, int stop_depth, int sign, int& cur) {
      while (depth[cur] > stop_depth) {
        int pe = parent_edge[cur];
        int s = (edges[pe].to == cur) ? -1 : 1; // moving child -> parent
        coef[pe][j] += sign * s;
        cur = parent[cur];
      }
      (void)v;
    };
    int x = edges[fe].to, y = edges[fe].from;
    climb(x, depth[y], 1, x);
    climb(y, depth[x], -1, y);
    while (x != y) {
      int pex = parent_edge[x], pey = parent_edge[y];
      coef[pex][j] += (edges[pex].to == x) ? -1 : 1;
      coef[pey][j] -= (edges[pey].to == y) ? -1 : 1;
      x = parent[x];
      y = parent[y];
    }
  }

  // linear extensions of the internal depth order
  std::vector<std::vector<int>> extensions;
  {
    std::vector<std::pair<int, int>> cons; // from before to, both internal
    for (const auto& e : edges)
      if (!e.ext && e.from >= n && e.to >= n) cons.push_back({e.from, e.to});
    std::vector<int> cur, used(V, 0);
    std::function<void()> rec = [&]() {
      if ((int)cur.size() == I) {
        extensions.push_back(cur);
        return;
      }
      for (int v = n; v < V; ++v) {
        if (used[v]) continue;
        bool ok = true;
        for (auto& [a, b] : cons)
          if (b == v && !used[a]) ok = false;
        if (!ok) continue;
        used[v] = 1;
        cur.push_back(v);
        rec();
        cur.pop_back();
        used[v] = 0;
      }
    };
    rec();
  }
  // per extension, the edges crossing each of the I gaps
  std::vector<std::vector<std::vector<int>>> crossing(extensions.size());
  for (size_t xi = 0; xi < extensions.size(); ++xi) {
    std::vector<int> pos(V, 0);
    for (int i = 0; i < I; ++i) pos[extensions[xi][i]] = i + 1;
    crossing[xi].assign(I, {});
    for (int e = 0; e < (int)edges.size(); ++e)
      for (int gap = pos[edges[e].from]; gap < pos[edges[e].to]; ++gap)
        crossing[xi][gap].push_back(e);
  }

  long long S = lat.sites();
  std::vector<double> M(n == 2 ? (size_t)S : 1, 0.0);
  int jext = -1;
  for (int j = 0; j < f; ++j)
    if (edges[free_edges[j]].ext) jext = j;

  std::vector<long long> q(f, 0);
  std::vector<long long> kmode(edges.size());
  std::vector<double> emu2(edges.size());
  while (true) {
    for (int e = 0; e < (int)edges.size(); ++e) {
      long long mode = 0;
      for (int j = 0; j < f; ++j) {
        int c = coef[e][j];
        if (c > 0)
          for (int r = 0; r < c; ++r) mode = lat.mode_add(mode, q[j]);
        else if (c < 0)
          for (int r = 0; r < -c; ++r) mode = lat.mode_add(mode, lat.mode_neg(q[j]));
      }
      kmode[e] = mode;
      emu2[e] = lat.mu2(mode);
    }
    double ti = 0;
    for (size_t xi = 0; xi < extensions.size(); ++xi) {
      double prod = 1;
      for (int gap = 0; gap < I; ++gap) {
        double sgap = 0;
        for (int e : crossing[xi][gap]) sgap += emu2[e];
        prod /= sgap;
      }
      ti += prod;
    }
    if (n == 2)
      M[(size_t)q[jext]] += ti;
    else
      M[0] += ti;

    int lvl = f - 1;
    while (lvl >= 0 && ++q[lvl] == S) q[lvl--] = 0;
    if (lvl < 0) break;
  }

  double norm = cumfac * std::pow(lat.cell_volume() * (double)S, -(double)f);
  Field out;
  if (n == 2) {
    out = lat.idft_real(M);
    for (double& v : out) v *= norm * (double)S;
  } else {
    out.assign((size_t)S, norm * M[0]);
  }
  return out;
}

} // namespace levypw
