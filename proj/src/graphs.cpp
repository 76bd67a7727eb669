#include "levypw/graphs.hpp"

#include "levypw/lattice.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace levypw {

int PWGraph::order() const {
  int m = 0;
  for (const auto& t : trees) m += tree_order(t);
  return m;
}

long long PWGraph::tree_multiplicity() const {
  long long m = 1;
  for (const auto& t : trees) m *= multiplicity(t);
  return m;
}

bool PWGraph::has_init_leaf() const {
  for (const auto& t : trees)
    if (count_leaves(t, TreeNode::Kind::InitLeaf) > 0) return true;
  return false;
}

std::string PWGraph::encode() const {
  std::string s = "T[";
  for (size_t i = 0; i < trees.size(); ++i) {
    if (i) s += "|";
    s += levypw::encode(trees[i]);
  }
  s += "];B[";
  for (const auto& b : blocks) {
    s += "{";
    for (size_t i = 0; i < b.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(b[i].first) + "." + std::to_string(b[i].second);
    }
    s += "}";
  }
  s += "]";
  return s;
}

std::vector<std::vector<std::vector<int>>> set_partitions(int k) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> cur;
  auto rec = [&](auto&& self, int e) -> void {
    if (e == k) {
      out.push_back(cur);
      return;
    }
    // index loop: the recursive call grows cur and may reallocate it
    for (size_t i = 0, nb = cur.size(); i < nb; ++i) {
      cur[i].push_back(e);
      self(self, e + 1);
      cur[i].pop_back();
    }
    cur.push_back({e});
    self(self, e + 1);
    cur.pop_back();
  };
  rec(rec, 0);
  if (k == 0) out = {{}};
  return out;
}

namespace {

// ordered tuples of canonical trees with orders summing to m
void tree_tuples(int m, int n, int p, bool equilibrium_only,
                 std::vector<RootedTree>& cur, std::vector<PWGraph>& out) {
  if ((int)cur.size() == n) {
    if (m != 0) return;
    PWGraph g;
    g.trees = cur;
    out.push_back(std::move(g));
    return;
  }
  for (int o = 0; o <= m; ++o) {
    for (auto& [t, mult] : enumerate_trees(o, p, !equilibrium_only)) {
      cur.push_back(t);
      tree_tuples(m - o, n, p, equilibrium_only, cur, out);
      cur.pop_back();
    }
  }
}

} // namespace

std::vector<PWGraph> enumerate_graphs(int m, int n, int p, bool equilibrium_only) {
  if (m < 0 || n < 1) throw ConfigError("enumerate_graphs: need m >= 0, n >= 1");
  if (n > 4) throw ConfigError("enumerate_graphs: root count cap is 4");
  if (m > 4) throw ConfigError("enumerate_graphs: order cap is 4");

  std::vector<PWGraph> shells;
  std::vector<RootedTree> cur;
  tree_tuples(m, n, p, equilibrium_only, cur, shells);

  std::vector<PWGraph> out;
  for (const auto& shell : shells) {
    // flatten noise leaves: (tree, ordinal) in tree order
    std::vector<std::pair<int, int>> leaves;
    for (int ti = 0; ti < (int)shell.trees.size(); ++ti) {
      int cnt = count_leaves(shell.trees[ti], TreeNode::Kind::NoiseLeaf);
      for (int l = 0; l < cnt; ++l) leaves.push_back({ti, l});
    }
    for (const auto& part : set_partitions((int)leaves.size())) {
      PWGraph g = shell;
      for (const auto& blk : part) {
        std::vector<std::pair<int, int>> b;
        for (int idx : blk) b.push_back(leaves[idx]);
        std::sort(b.begin(), b.end());
        g.blocks.push_back(std::move(b));
      }
      std::sort(g.blocks.begin(), g.blocks.end());
      out.push_back(std::move(g));
    }
  }
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> up;
  explicit UnionFind(int n) : up(n) { std::iota(up.begin(), up.end(), 0); }
  int find(int a) {
    while (up[a] != a) a = up[a] = up[up[a]];
    return a;
  }
  void unite(int a, int b) { up[find(a)] = find(b); }
};

// union-find over trees: a block joins every tree owning one of its leaves
UnionFind root_relation(const PWGraph& g) {
  UnionFind uf(g.n_roots());
  for (const auto& b : g.blocks)
    for (size_t i = 1; i < b.size(); ++i) uf.unite(b[0].first, b[i].first);
  return uf;
}

} // namespace

bool is_connected(const PWGraph& g) {
  auto uf = root_relation(g);
  for (int i = 1; i < g.n_roots(); ++i)
    if (uf.find(i) != uf.find(0)) return false;
  return true;
}

std::vector<PWGraph> filter_connected(const std::vector<PWGraph>& gs) {
  std::vector<PWGraph> out;
  for (const auto& g : gs)
    if (is_connected(g)) out.push_back(g);
  return out;
}

Decomposition decompose_components(const PWGraph& g) {
  auto uf = root_relation(g);
  std::map<int, int> class_of; // uf representative -> component id
  Decomposition d;
  for (int i = 0; i < g.n_roots(); ++i) {
    int r = uf.find(i);
    if (!class_of.count(r)) {
      class_of[r] = (int)d.root_classes.size();
      d.root_classes.push_back({});
      d.components.push_back({});
    }
    d.root_classes[class_of[r]].push_back(i);
  }
  // local re-indexing of trees per component
  std::vector<int> local(g.n_roots());
  for (const auto& cls : d.root_classes)
    for (size_t k = 0; k < cls.size(); ++k) local[cls[k]] = (int)k;
  for (int i = 0; i < g.n_roots(); ++i)
    d.components[class_of[uf.find(i)]].trees.push_back(g.trees[i]);
  for (const auto& b : g.blocks) {
    int c = class_of[uf.find(b[0].first)];
    std::vector<std::pair<int, int>> lb;
    for (auto [ti, l] : b) lb.push_back({local[ti], l});
    std::sort(lb.begin(), lb.end());
    d.components[c].blocks.push_back(std::move(lb));
  }
  for (auto& comp : d.components) std::sort(comp.blocks.begin(), comp.blocks.end());
  return d;
}

PWGraph compose_components(const Decomposition& d) {
  int n = 0;
  for (const auto& cls : d.root_classes) n += (int)cls.size();
  PWGraph g;
  g.trees.resize(n);
  for (size_t c = 0; c < d.root_classes.size(); ++c) {
    const auto& cls = d.root_classes[c];
    for (size_t k = 0; k < cls.size(); ++k) g.trees[cls[k]] = d.components[c].trees[k];
    for (const auto& b : d.components[c].blocks) {
      std::vector<std::pair<int, int>> gb;
      for (auto [ti, l] : b) gb.push_back({cls[ti], l});
      std::sort(gb.begin(), gb.end());
      g.blocks.push_back(std::move(gb));
    }
  }
  std::sort(g.blocks.begin(), g.blocks.end());
  return g;
}

bool has_odd_block(const PWGraph& g) {
  for (const auto& b : g.blocks)
    if (b.size() % 2) return true;
  return false;
}

std::vector<PWGraph> prune_odd(const std::vector<PWGraph>& gs) {
  std::vector<PWGraph> out;
  for (const auto& g : gs)
    if (!has_odd_block(g)) out.push_back(g);
  return out;
}

namespace {

// DFS assigning: leaf ordinals (noise leaves, in canonical child order) to the
// id of the vertex owning the leaf edge; init leaves and inner vertices get ids
struct TreeWalk {
  SimplifiedGraph* sg;
  std::vector<int>* leaf_parent; // per noise-leaf ordinal: parent vertex id
  int walk(const TreeNode& n, int parent_id) {
    if (n.kind == TreeNode::Kind::NoiseLeaf) {
      leaf_parent->push_back(parent_id);
      return -1;
    }
    if (n.kind == TreeNode::Kind::InitLeaf) {
      int id = sg->n_vertices();
      sg->vertices.push_back({SimplifiedGraph::VK::InitLeaf, 0});
      sg->edges.push_back({parent_id, id});
      return id;
    }
    int id = sg->n_vertices();
    sg->vertices.push_back({SimplifiedGraph::VK::Inner, 0});
    sg->edges.push_back({parent_id, id});
    for (const auto& c : n.children) walk(c, id);
    return id;
  }
};

} // namespace

SimplifiedGraph simplify(const PWGraph& g) {
  SimplifiedGraph sg;
  sg.n_roots = g.n_roots();
  sg.order = g.order();
  sg.mult = g.tree_multiplicity();
  sg.id = g.encode();
  for (int i = 0; i < sg.n_roots; ++i) sg.vertices.push_back({SimplifiedGraph::VK::Root, 0});

  // walk trees; collect per-tree leaf parents
  std::vector<std::vector<int>> leaf_parent(g.n_roots());
  for (int ti = 0; ti < g.n_roots(); ++ti) {
    TreeWalk w{&sg, &leaf_parent[ti]};
    w.walk(g.trees[ti].body, ti);
  }
  // blocks: one empty vertex each; one edge per leaf, parent -> empty
  for (const auto& b : g.blocks) {
    int id = sg.n_vertices();
    sg.vertices.push_back({SimplifiedGraph::VK::Empty, (int)b.size()});
    for (auto [ti, l] : b) {
      if (l >= (int)leaf_parent[ti].size())
        throw ConfigError("simplify: block references a missing leaf");
      sg.edges.push_back({leaf_parent[ti][l], id});
    }
  }
  return sg;
}

bool is_tadpole(const PWGraph& g) {
  // reuse the simplification walk to find each leaf's parent vertex
  SimplifiedGraph sg = simplify(g);
  int first_empty = 0;
  while (first_empty < sg.n_vertices() &&
         sg.vertices[first_empty].kind != SimplifiedGraph::VK::Empty)
    ++first_empty;
  for (int v = first_empty; v < sg.n_vertices(); ++v) {
    if (sg.vertices[v].kind != SimplifiedGraph::VK::Empty) continue;
    if (sg.vertices[v].legs < 2) continue;
    int parent = -1;
    bool same = true;
    for (const auto& e : sg.edges) {
      if (e.to != v) continue;
      if (parent == -1) parent = e.from;
      else if (parent != e.from) same = false;
    }
    if (same && parent >= 0 && sg.vertices[parent].kind == SimplifiedGraph::VK::Inner)
      return true;
  }
  return false;
}

std::vector<int> SimplifiedGraph::empty_leg_counts() const {
  std::vector<int> out;
  for (const auto& v : vertices)
    if (v.kind == VK::Empty) out.push_back(v.legs);
  return out;
}

bool SimplifiedGraph::has_init_leaf() const {
  for (const auto& v : vertices)
    if (v.kind == VK::InitLeaf) return true;
  return false;
}

std::string graph_record(const PWGraph& g) {
  std::string s = g.encode();
  s += " order=" + std::to_string(g.order());
  s += " mult=" + std::to_string(g.tree_multiplicity());
  s += " legs=";
  for (size_t i = 0; i < g.blocks.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(g.blocks[i].size());
  }
  if (g.blocks.empty()) s += "-";
  s += is_connected(g) ? " connected=1" : " connected=0";
  s += is_tadpole(g) ? " tadpole=1" : " tadpole=0";
  return s;
}

} // namespace levypw
