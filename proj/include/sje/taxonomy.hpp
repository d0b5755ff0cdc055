#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sje/types.hpp"

namespace sje {

using NodeId = std::uint32_t;

struct TaxonomyEdge {
  std::string parent;
  std::string child;
};

// Maps a class to a taxonomy node. If `node` does not exist in the edge
// list, it is created as a leaf directly below `attach_under`.
struct LeafSpec {
  std::string class_name;
  std::string node;
  std::optional<std::string> attach_under;
};

/// Rooted class hierarchy (a tree by default, DAGs accepted).
class Taxonomy {
 public:
  // Throws ValidationError on a cycle, several roots, an unknown attachment
  // node or a class with no node.
  static Taxonomy build(const std::vector<TaxonomyEdge>& edges, const std::vector<LeafSpec>& leaves,
                        const std::optional<std::string>& default_attach = std::nullopt);

  std::size_t num_nodes() const { return names_.size(); }
  NodeId root() const { return root_; }
  const std::string& name(NodeId n) const { return names_.at(n); }
  std::optional<NodeId> find(const std::string& name) const;
  NodeId node_of_class(const std::string& class_name) const;

  const std::vector<NodeId>& parents(NodeId n) const { return parents_.at(n); }
  const std::vector<NodeId>& children(NodeId n) const { return children_.at(n); }
  bool is_leaf(NodeId n) const { return children_.at(n).empty(); }
  // Shortest number of edges from the root.
  int depth(NodeId n) const { return depth_.at(n); }

  // Every ancestor of n including n itself, with the shortest upward
  // distance, sorted by node id.
  const std::vector<std::pair<NodeId, int>>& ancestors(NodeId n) const { return ancestors_.at(n); }
  // n and all nodes below it, sorted by node id.
  const std::vector<NodeId>& descendants(NodeId n) const { return descendants_.at(n); }

  const std::vector<std::pair<std::string, NodeId>>& class_nodes() const { return class_nodes_; }

  // Own corpus count per node; empty means "1 per leaf".
  std::unordered_map<NodeId, std::uint64_t> counts;

 private:
  NodeId add_node(const std::string& name);
  void finalize();

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> ids_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> depth_;
  std::vector<std::vector<std::pair<NodeId, int>>> ancestors_;
  std::vector<std::vector<NodeId>> descendants_;
  std::vector<std::pair<std::string, NodeId>> class_nodes_;
  std::unordered_map<std::string, NodeId> class_index_;
  NodeId root_ = 0;
};

/// Information content per node, IC(n) = -ln(count(n) / count(root)), where
/// count(n) sums own counts over n and its descendants.
using ICTable = std::vector<double>;

// Uses tax.counts when present (adding 1 to every leaf if any leaf count is
// zero), otherwise one count per leaf.
ICTable information_content(const Taxonomy& tax);

// Most specific common subsumer: common ancestor with the largest IC, then
// the largest depth, then the lowest node id.
NodeId mscs(const Taxonomy& tax, const ICTable& ic, NodeId u, NodeId v);

enum class SimilarityKind { kJcn, kLin, kPath };
SimilarityKind parse_similarity_kind(const std::string& s);

// jcn = 2 IC(mscs) - IC(u) - IC(v); lin = 2 IC(mscs) / (IC(u) + IC(v));
// path = shortest u-v path through a common ancestor. With `invert`, path is
// mapped to 1 / (1 + len) and jcn to -jcn.
double similarity(const Taxonomy& tax, const ICTable& ic, NodeId u, NodeId v, SimilarityKind kind,
                  bool invert = false);

// Row y holds similarity(y, classes[i]) for every i, self entry included.
OutputEmbeddingTable build_hierarchy_embedding(const Taxonomy& tax, const ICTable& ic,
                                               const std::vector<std::string>& classes, SimilarityKind kind,
                                               bool invert = false);

// Taxonomy file: `parent\tchild` per line. Leaf map: `class\tnode[\tattach_under]`.
// Counts file: `node\tcount`.
std::vector<TaxonomyEdge> load_taxonomy_edges(const std::filesystem::path& path);
std::vector<LeafSpec> load_leaf_map(const std::filesystem::path& path);
void load_counts(const std::filesystem::path& path, Taxonomy& tax);

}  // namespace sje
