#include "sje/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sje/io.hpp"

namespace sje {

namespace {

// Breadth-first distances from `start` following `next` links.
std::vector<std::pair<NodeId, int>> bfs(NodeId start, const std::vector<std::vector<NodeId>>& next) {
  std::vector<int> dist(next.size(), -1);
  std::deque<NodeId> queue{start};
  dist[start] = 0;
  std::vector<std::pair<NodeId, int>> out;
  while (!queue.empty()) {
    NodeId n = queue.front();
    queue.pop_front();
    out.emplace_back(n, dist[n]);
    for (NodeId m : next[n]) {
      if (dist[m] < 0) {
        dist[m] = dist[n] + 1;
        queue.push_back(m);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::optional<NodeId> Taxonomy::find(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

NodeId Taxonomy::node_of_class(const std::string& class_name) const {
  auto it = class_index_.find(class_name);
  if (it == class_index_.end()) throw ValidationError("class '" + class_name + "' is not mapped to a taxonomy node");
  return it->second;
}

NodeId Taxonomy::add_node(const std::string& name) {
  auto [it, inserted] = ids_.emplace(name, static_cast<NodeId>(names_.size()));
  if (inserted) {
    names_.push_back(name);
    parents_.emplace_back();
    children_.emplace_back();
  }
  return it->second;
}

Taxonomy Taxonomy::build(const std::vector<TaxonomyEdge>& edges, const std::vector<LeafSpec>& leaves,
                         const std::optional<std::string>& default_attach) {
  Taxonomy tax;
  for (const auto& e : edges) {
    if (e.parent.empty() || e.child.empty()) throw ValidationError("taxonomy: empty node name");
    NodeId p = tax.add_node(e.parent);
    NodeId c = tax.add_node(e.child);
    if (p == c) throw ValidationError("taxonomy: cycle at node '" + e.parent + "'");
    auto& kids = tax.children_[p];
    if (std::find(kids.begin(), kids.end(), c) != kids.end()) continue;
    kids.push_back(c);
    tax.parents_[c].push_back(p);
  }

  for (const auto& leaf : leaves) {
    if (tax.class_index_.count(leaf.class_name)) {
      throw ValidationError("taxonomy: class '" + leaf.class_name + "' mapped twice");
    }
    auto node = tax.find(leaf.node);
    if (!node) {
      auto anchor = leaf.attach_under ? leaf.attach_under : default_attach;
      if (!anchor && tax.num_nodes() == 0) {
        node = tax.add_node(leaf.node);  // single-node taxonomy
      } else if (!anchor) {
        throw ValidationError("taxonomy: class '" + leaf.class_name + "' maps to unknown node '" + leaf.node +
                              "' and no attachment ancestor was given");
      } else {
        auto parent = tax.find(*anchor);
        if (!parent) throw ValidationError("taxonomy: attachment node '" + *anchor + "' does not exist");
        node = tax.add_node(leaf.node);
        tax.children_[*parent].push_back(*node);
        tax.parents_[*node].push_back(*parent);
      }
    }
    tax.class_index_.emplace(leaf.class_name, *node);
    tax.class_nodes_.emplace_back(leaf.class_name, *node);
  }
  tax.finalize();
  return tax;
}

void Taxonomy::finalize() {
  const std::size_t n = names_.size();
  if (n == 0) throw ValidationError("taxonomy: no nodes");

  // Kahn's algorithm: every node must be reached once all parents are.
  std::vector<std::size_t> pending(n);
  std::deque<NodeId> ready;
  for (NodeId i = 0; i < n; ++i) {
    pending[i] = parents_[i].size();
    if (pending[i] == 0) ready.push_back(i);
  }
  if (ready.size() > 1) {
    throw ValidationError("taxonomy: multiple roots ('" + names_[ready[0]] + "', '" + names_[ready[1]] + "')");
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    NodeId u = ready.front();
    ready.pop_front();
    ++visited;
    for (NodeId c : children_[u]) {
      if (--pending[c] == 0) ready.push_back(c);
    }
  }
  if (visited != n) throw ValidationError("taxonomy: cycle detected");
  root_ = 0;
  while (!parents_[root_].empty()) root_ = parents_[root_].front();

  depth_.assign(n, 0);
  for (auto [node, d] : bfs(root_, children_)) depth_[node] = d;
  ancestors_.resize(n);
  descendants_.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    ancestors_[i] = bfs(i, parents_);
    for (auto [node, d] : bfs(i, children_)) descendants_[i].push_back(node);
  }
}

ICTable information_content(const Taxonomy& tax) {
  const std::size_t n = tax.num_nodes();
  std::vector<double> own(n, 0.0);
  if (tax.counts.empty()) {
    for (NodeId i = 0; i < n; ++i) own[i] = tax.is_leaf(i) ? 1.0 : 0.0;
  } else {
    bool zero_leaf = false;
    for (NodeId i = 0; i < n; ++i) {
      auto it = tax.counts.find(i);
      own[i] = it == tax.counts.end() ? 0.0 : static_cast<double>(it->second);
      if (tax.is_leaf(i) && own[i] == 0.0) zero_leaf = true;
    }
    if (zero_leaf) {
      for (NodeId i = 0; i < n; ++i) {
        if (tax.is_leaf(i)) own[i] += 1.0;
      }
    }
  }

  std::vector<double> total(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId d : tax.descendants(i)) total[i] += own[d];
  }
  const double root_total = total[tax.root()];
  if (root_total <= 0.0) throw ValidationError("information content: zero total count");

  ICTable ic(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    if (i == tax.root()) continue;
    ic[i] = -std::log(total[i] / root_total);
    if (ic[i] == 0.0) ic[i] = 0.0;  // no -0
  }
  return ic;
}

NodeId mscs(const Taxonomy& tax, const ICTable& ic, NodeId u, NodeId v) {
  const auto& au = tax.ancestors(u);
  const auto& av = tax.ancestors(v);
  std::optional<NodeId> best;
  auto better = [&](NodeId a, NodeId b) {
    if (ic[a] != ic[b]) return ic[a] > ic[b];
    if (tax.depth(a) != tax.depth(b)) return tax.depth(a) > tax.depth(b);
    return a < b;
  };
  for (std::size_t i = 0, j = 0; i < au.size() && j < av.size();) {
    if (au[i].first < av[j].first) {
      ++i;
    } else if (av[j].first < au[i].first) {
      ++j;
    } else {
      NodeId a = au[i].first;
      if (!best || better(a, *best)) best = a;
      ++i;
      ++j;
    }
  }
  return best.value_or(tax.root());
}

SimilarityKind parse_similarity_kind(const std::string& s) {
  if (s == "jcn") return SimilarityKind::kJcn;
  if (s == "lin") return SimilarityKind::kLin;
  if (s == "path") return SimilarityKind::kPath;
  throw ValidationError("unknown similarity kind '" + s + "' (expected jcn, lin or path)");
}

double similarity(const Taxonomy& tax, const ICTable& ic, NodeId u, NodeId v, SimilarityKind kind, bool invert) {
  if (u >= tax.num_nodes() || v >= tax.num_nodes()) throw ValidationError("similarity: unknown node");
  switch (kind) {
    case SimilarityKind::kJcn: {
      double jcn = 2.0 * ic[mscs(tax, ic, u, v)] - (ic[u] + ic[v]);
      if (jcn == 0.0) jcn = 0.0;
      return invert ? (jcn == 0.0 ? 0.0 : -jcn) : jcn;
    }
    case SimilarityKind::kLin: {
      double denom = ic[u] + ic[v];
      if (denom == 0.0) return u == v ? 1.0 : 0.0;
      return 2.0 * ic[mscs(tax, ic, u, v)] / denom;
    }
    case SimilarityKind::kPath: {
      const auto& au = tax.ancestors(u);
      const auto& av = tax.ancestors(v);
      int len = std::numeric_limits<int>::max();
      for (std::size_t i = 0, j = 0; i < au.size() && j < av.size();) {
        if (au[i].first < av[j].first) {
          ++i;
        } else if (av[j].first < au[i].first) {
          ++j;
        } else {
          len = std::min(len, au[i].second + av[j].second);
          ++i;
          ++j;
        }
      }
      return invert ? 1.0 / (1.0 + len) : static_cast<double>(len);
    }
  }
  return 0.0;
}

OutputEmbeddingTable build_hierarchy_embedding(const Taxonomy& tax, const ICTable& ic,
                                               const std::vector<std::string>& classes, SimilarityKind kind,
                                               bool invert) {
  if (classes.empty()) throw ValidationError("hierarchy embedding: no classes");
  std::vector<NodeId> nodes;
  nodes.reserve(classes.size());
  for (const auto& c : classes) nodes.push_back(tax.node_of_class(c));
  OutputEmbeddingTable table;
  table.kind = EmbeddingKind::kHierarchy;
  table.class_names = classes;
  const auto C = static_cast<Eigen::Index>(classes.size());
  table.rows.resize(C, C);
  for (Eigen::Index i = 0; i < C; ++i) {
    for (Eigen::Index j = 0; j < C; ++j) {
      table.rows(i, j) = similarity(tax, ic, nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)],
                                    kind, invert);
    }
  }
  return table;
}

std::vector<TaxonomyEdge> load_taxonomy_edges(const std::filesystem::path& path) {
  std::vector<TaxonomyEdge> edges;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_fields(lines[i], '\t');
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(i + 1) + ": expected 'parent\\tchild'");
    }
    edges.push_back({std::string(f[0]), std::string(f[1])});
  }
  return edges;
}

std::vector<LeafSpec> load_leaf_map(const std::filesystem::path& path) {
  std::vector<LeafSpec> leaves;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_fields(lines[i], '\t');
    if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(i + 1) +
                            ": expected 'class_name\\tnode_name[\\tattach_under]'");
    }
    LeafSpec spec{std::string(f[0]), std::string(f[1]), std::nullopt};
    if (f.size() == 3 && !f[2].empty()) spec.attach_under = std::string(f[2]);
    leaves.push_back(std::move(spec));
  }
  return leaves;
}

void load_counts(const std::filesystem::path& path, Taxonomy& tax) {
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_fields(lines[i], '\t');
    auto where = path.string() + ":" + std::to_string(i + 1) + ": ";
    if (f.size() != 2) throw ValidationError(where + "expected 'node_name\\tcount'");
    auto node = tax.find(std::string(f[0]));
    if (!node) throw ValidationError(where + "unknown node '" + std::string(f[0]) + "'");
    auto count = parse_uint(f[1]);
    if (!count) throw ValidationError(where + "bad count '" + std::string(f[1]) + "'");
    tax.counts[*node] = *count;
  }
}

}  // namespace sje
