#include "sje/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace sje {

namespace {

struct KindName {
  EmbeddingKind kind;
  std::string_view tag;
};

constexpr KindName kKindNames[] = {
    {EmbeddingKind::kAttributesBinary, "attributes-binary"},
    {EmbeddingKind::kAttributesContinuous, "attributes-continuous"},
    {EmbeddingKind::kBow, "bow"},
    {EmbeddingKind::kWordVector, "word-vector"},
    {EmbeddingKind::kHierarchy, "hierarchy"},
    {EmbeddingKind::kConcatenated, "concatenated"},
};

void check_sorted_unique(const std::vector<ClassId>& v, const char* what) {
  if (v.empty()) throw ValidationError(std::string("split: ") + what + " set is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i - 1] < v[i])) {
      throw ValidationError(std::string("split: ") + what + " set is not sorted/unique");
    }
  }
}

}  // namespace

std::string_view to_string(EmbeddingKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.tag;
  }
  return "unknown";
}

EmbeddingKind parse_embedding_kind(std::string_view tag) {
  for (const auto& k : kKindNames) {
    if (k.tag == tag) return k.kind;
  }
  throw ValidationError("unknown embedding kind '" + std::string(tag) + "'");
}

void InputEmbeddingSet::validate() const {
  if (labels.empty()) throw ValidationError("input embeddings: N >= 1 violated");
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ValidationError("input embeddings: label count does not match feature rows");
  }
  if (features.cols() < 1) throw ValidationError("input embeddings: D must be positive");
  if (!features.allFinite()) throw ValidationError("input embeddings: non-finite value");
  for (ClassId c : labels) {
    if (index_of(c) >= class_names.size()) {
      throw ValidationError("input embeddings: label out of range");
    }
  }
}

InputEmbeddingSet InputEmbeddingSet::subset(const std::vector<ClassId>& classes) const {
  std::vector<Eigen::Index> keep;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (contains(classes, labels[n])) keep.push_back(static_cast<Eigen::Index>(n));
  }
  InputEmbeddingSet out;
  out.class_names = class_names;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), features.cols());
  out.labels.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(keep[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(keep[i])]);
  }
  return out;
}

void OutputEmbeddingTable::validate() const {
  if (rows.cols() < 1) throw ValidationError("output table: E must be positive");
  if (rows.rows() != static_cast<Eigen::Index>(class_names.size())) {
    throw ValidationError("output table: row count does not match class count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : class_names) {
    if (name.empty()) throw ValidationError("output table: empty class name");
    if (!seen.insert(name).second) throw ValidationError("output table: duplicate class '" + name + "'");
  }
  if (!rows.allFinite()) throw ValidationError("output table: non-finite value");
  if (kind == EmbeddingKind::kAttributesBinary) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        double v = rows(i, j);
        if (v != 0.0 && v != 1.0) {
          throw ValidationError("output table: attributes-binary row '" +
                                class_names[static_cast<std::size_t>(i)] + "' has a value outside {0,1}");
        }
      }
    }
  }
}

std::ptrdiff_t OutputEmbeddingTable::find(std::string_view name) const {
  auto it = std::find(class_names.begin(), class_names.end(), name);
  return it == class_names.end() ? -1 : std::distance(class_names.begin(), it);
}

OutputEmbeddingTable OutputEmbeddingTable::aligned_to(const std::vector<std::string>& names) const {
  OutputEmbeddingTable out;
  out.kind = kind;
  out.class_names = names;
  out.rows.resize(static_cast<Eigen::Index>(names.size()), rows.cols());
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto r = find(names[i]);
    if (r < 0) throw ValidationError("output table has no row for class '" + names[i] + "'");
    out.rows.row(static_cast<Eigen::Index>(i)) = rows.row(r);
  }
  return out;
}

void SplitSpec::validate() const {
  check_sorted_unique(train, "train");
  check_sorted_unique(val, "val");
  check_sorted_unique(test, "test");
  auto disjoint = [](const std::vector<ClassId>& a, const std::vector<ClassId>& b) {
    std::vector<ClassId> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    return both.empty();
  };
  if (!disjoint(train, val) || !disjoint(train, test) || !disjoint(val, test)) {
    throw ValidationError("split: train/val/test class sets overlap");
  }
}

bool contains(const std::vector<ClassId>& sorted, ClassId c) {
  return std::binary_search(sorted.begin(), sorted.end(), c);
}

OutputEmbeddingTable align_table(const OutputEmbeddingTable& table, const std::vector<std::string>& names,
                                 const std::vector<ClassId>& needed) {
  if (table.class_names == names) return table;
  OutputEmbeddingTable out;
  out.kind = table.kind;
  out.class_names = names;
  out.rows = Matrix::Zero(static_cast<Eigen::Index>(names.size()), table.rows.cols());
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto r = table.find(names[i]);
    if (r >= 0) {
      out.rows.row(static_cast<Eigen::Index>(i)) = table.rows.row(r);
    } else if (contains(needed, class_at(i))) {
      throw ValidationError("output table is missing class '" + names[i] + "'");
    }
  }
  return out;
}

}  // namespace sje
