#pragma once

#include "levypw/trees.hpp"

#include <string>
#include <utility>
#include <vector>

namespace levypw {

// n rooted trees with their type-1 (noise) leaves partitioned into blocks;
// each block becomes one empty vertex carrying a cumulant factor. Leaves are
// addressed by (tree index, leaf ordinal) with ordinals assigned in depth-first
// order over the canonical tree.
struct PWGraph {
  std::vector<RootedTree> trees;
  std::vector<std::vector<std::pair<int, int>>> blocks; // sorted within and across

  int order() const;
  int n_roots() const { return (int)trees.size(); }
  long long tree_multiplicity() const; // product of per-tree multiplicities
  bool has_init_leaf() const;
  std::string encode() const; // stable identity string
};

std::vector<std::vector<std::vector<int>>> set_partitions(int k);

std::vector<PWGraph> enumerate_graphs(int m, int n, int p, bool equilibrium_only);

bool is_connected(const PWGraph& g);
std::vector<PWGraph> filter_connected(const std::vector<PWGraph>& gs);

struct Decomposition {
  std::vector<std::vector<int>> root_classes; // original root indices per component
  std::vector<PWGraph> components;            // re-indexed to local roots
};
Decomposition decompose_components(const PWGraph& g);
PWGraph compose_components(const Decomposition& d); // inverse of decompose

// True when some block of >= 2 leaves hangs entirely off one inner vertex
// (legs of a vertex closed onto a single empty vertex).
bool is_tadpole(const PWGraph& g);

bool has_odd_block(const PWGraph& g);
std::vector<PWGraph> prune_odd(const std::vector<PWGraph>& gs);

// Contraction of every degree-2 noise leaf into a single edge. Vertices are
// roots (first n ids), then tree inner vertices, then init leaves, then empty
// vertices; edges run parent -> child (the child side is deeper in time).
struct SimplifiedGraph {
  enum class VK { Root, Inner, Empty, InitLeaf };
  struct Vertex {
    VK kind;
    int legs = 0; // empty vertices: block size
  };
  struct Edge {
    int from = 0, to = 0; // from is the parent (shallower) side
  };
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  int n_roots = 0;
  int order = 0;            // total inner vertex count
  long long mult = 1;       // product of tree multiplicities
  std::string id;           // carries the originating (trees, partition) identity

  int n_vertices() const { return (int)vertices.size(); }
  std::vector<int> empty_leg_counts() const;
  bool has_init_leaf() const;
};

SimplifiedGraph simplify(const PWGraph& g);

std::string graph_record(const PWGraph& g); // one-line CLI dump entry

} // namespace levypw
