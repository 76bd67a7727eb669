#include "levypw/trees.hpp"

#include "levypw/lattice.hpp"

#include <algorithm>
#include <map>

namespace levypw {

int tree_order(const TreeNode& n) {
  if (n.is_leaf()) return 0;
  int j = 1;
  for (const auto& c : n.children) j += tree_order(c);
  return j;
}

int tree_order(const RootedTree& t) { return tree_order(t.body); }

int count_leaves(const TreeNode& n, TreeNode::Kind kind) {
  if (n.is_leaf()) return n.kind == kind ? 1 : 0;
  int c = 0;
  for (const auto& ch : n.children) c += count_leaves(ch, kind);
  return c;
}

int count_leaves(const RootedTree& t, TreeNode::Kind kind) {
  return count_leaves(t.body, kind);
}

std::string encode(const TreeNode& n) {
  switch (n.kind) {
    case TreeNode::Kind::NoiseLeaf: return "a";
    case TreeNode::Kind::InitLeaf: return "b";
    case TreeNode::Kind::Inner: {
      std::string s = "c(";
      for (const auto& c : n.children) s += encode(c);
      s += ")";
      return s;
    }
  }
  return "?";
}

std::string encode(const RootedTree& t) { return encode(t.body); }

void canonicalize(TreeNode& n) {
  if (n.is_leaf()) return;
  for (auto& c : n.children) canonicalize(c);
  std::sort(n.children.begin(), n.children.end(),
            [](const TreeNode& x, const TreeNode& y) { return encode(x) < encode(y); });
}

static long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

static void check_well_formed(const TreeNode& n, int p) {
  if (n.is_leaf()) {
    if (!n.children.empty()) throw ConfigError("tree: leaf with children");
    return;
  }
  if ((int)n.children.size() != p)
    throw ConfigError("tree: inner vertex must have exactly p children");
  for (const auto& c : n.children) check_well_formed(c, p);
}

static long long vertex_product(const TreeNode& n, int p) {
  if (n.is_leaf()) return 1;
  std::map<std::string, int> shape_counts;
  long long m = 1;
  for (const auto& c : n.children) {
    ++shape_counts[encode(c)];
    m *= vertex_product(c, p);
  }
  long long v = factorial(p);
  for (const auto& [enc, k] : shape_counts) v /= factorial(k);
  return v * m;
}

long long multiplicity(const RootedTree& t) {
  check_well_formed(t.body, t.p);
  return vertex_product(t.body, t.p);
}

namespace {

struct Pool {
  // canonical trees of each order < j, flattened, with orders
  std::vector<TreeNode> nodes;
  std::vector<int> orders;
};

// choose a non-decreasing sequence of p pool indices with orders summing to
// `want`; non-decreasing indices enumerate each multiset exactly once
void choose(const Pool& pool, int p, int want, int from, std::vector<int>& picked,
            std::vector<std::vector<int>>& out) {
  if ((int)picked.size() == p) {
    if (want == 0) out.push_back(picked);
    return;
  }
  int slots_left = p - (int)picked.size();
  for (int i = from; i < (int)pool.nodes.size(); ++i) {
    int o = pool.orders[i];
    if (o > want) continue;
    // remaining slots can absorb at most slots_left-1 more trees of any order
    (void)slots_left;
    picked.push_back(i);
    choose(pool, p, want - o, i, picked, out);
    picked.pop_back();
  }
}

} // namespace

std::vector<std::pair<RootedTree, long long>> enumerate_trees(int j, int p,
                                                              bool with_init_leaves) {
  if (j < 0) throw ConfigError("enumerate_trees: order must be >= 0");
  if (p < 1) throw ConfigError("enumerate_trees: p must be >= 1");
  if (j > 6) throw ConfigError("enumerate_trees: order cap is 6");

  std::vector<std::vector<TreeNode>> by_order(j + 1);
  by_order[0].push_back(TreeNode{TreeNode::Kind::NoiseLeaf, {}});
  if (with_init_leaves) by_order[0].push_back(TreeNode{TreeNode::Kind::InitLeaf, {}});

  for (int jj = 1; jj <= j; ++jj) {
    Pool pool;
    for (int o = 0; o < jj; ++o)
      for (const auto& t : by_order[o]) {
        pool.nodes.push_back(t);
        pool.orders.push_back(o);
      }
    std::vector<std::vector<int>> picks;
    std::vector<int> cur;
    choose(pool, p, jj - 1, 0, cur, picks);
    for (const auto& pk : picks) {
      TreeNode n{TreeNode::Kind::Inner, {}};
      for (int idx : pk) n.children.push_back(pool.nodes[idx]);
      canonicalize(n);
      by_order[jj].push_back(std::move(n));
    }
  }

  std::vector<std::pair<RootedTree, long long>> out;
  for (auto& n : by_order[j]) {
    RootedTree t{std::move(n), p};
    long long m = multiplicity(t);
    out.push_back({std::move(t), m});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return encode(x.first) < encode(y.first);
  });
  return out;
}

std::vector<RootedTree> cut(const RootedTree& t) {
  if (t.body.is_leaf()) throw ConfigError("cut: tree has no inner vertex");
  std::vector<RootedTree> out;
  for (const auto& c : t.body.children) out.push_back(RootedTree{c, t.p});
  return out;
}

RootedTree attach(const std::vector<RootedTree>& children) {
  if (children.empty()) throw ConfigError("attach: needs at least one child");
  int p = (int)children.size();
  TreeNode n{TreeNode::Kind::Inner, {}};
  for (const auto& c : children) {
    if (c.p != p && !c.body.is_leaf() )
      throw ConfigError("attach: child fertility mismatch");
    n.children.push_back(c.body);
  }
  canonicalize(n);
  return RootedTree{std::move(n), p};
}

std::string tree_record(const RootedTree& t, long long mult) {
  return encode(t) + " order=" + std::to_string(tree_order(t)) +
         " noise_leaves=" + std::to_string(count_leaves(t, TreeNode::Kind::NoiseLeaf)) +
         " init_leaves=" + std::to_string(count_leaves(t, TreeNode::Kind::InitLeaf)) +
         " mult=" + std::to_string(mult);
}

} // namespace levypw
