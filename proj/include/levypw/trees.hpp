#pragma once

#include <string>
#include <utility>
#include <vector>

namespace levypw {

// Rooted tree body hanging from the root edge. Inner vertices carry exactly p
// children; leaves are noise insertions (type 1) or initial-condition
// insertions (type 2). Canonical form sorts children by encoding.
struct TreeNode {
  enum class Kind { NoiseLeaf, InitLeaf, Inner };
  Kind kind = Kind::NoiseLeaf;
  std::vector<TreeNode> children;

  bool is_leaf() const { return kind != Kind::Inner; }
};

struct RootedTree {
  TreeNode body;
  int p = 3; // fertility parameter: every inner vertex has p children
};

int tree_order(const TreeNode& n); // number of inner vertices
int tree_order(const RootedTree& t);
int count_leaves(const TreeNode& n, TreeNode::Kind kind);
int count_leaves(const RootedTree& t, TreeNode::Kind kind);

// Canonical encoding: "a" noise leaf, "b" init leaf, "c(...)" inner vertex with
// child encodings concatenated in sorted order. Total order = string order.
std::string encode(const TreeNode& n);
std::string encode(const RootedTree& t);
void canonicalize(TreeNode& n);

// Product over inner vertices of p! / prod(k_S!) where k_S counts children of
// equal canonical shape S. Children of equal order but different shape are
// distinguishable and contribute separate factorials.
long long multiplicity(const RootedTree& t);

// All canonical trees of order j with their multiplicities, built by the
// multiset recursion: an order-j tree is an inner vertex over a multiset of p
// subtrees with orders summing to j-1.
std::vector<std::pair<RootedTree, long long>> enumerate_trees(int j, int p,
                                                              bool with_init_leaves = true);

std::vector<RootedTree> cut(const RootedTree& t); // the p subtrees at the top inner vertex
RootedTree attach(const std::vector<RootedTree>& children); // inverse of cut

// Serialization used by the CLI dump: one line per tree.
std::string tree_record(const RootedTree& t, long long mult);

} // namespace levypw
