#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sje {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Malformed input or a violated invariant. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense class index into a dataset's class list.
enum class ClassId : std::uint32_t {};

constexpr std::size_t index_of(ClassId c) { return static_cast<std::size_t>(c); }
constexpr ClassId class_at(std::size_t i) { return static_cast<ClassId>(i); }

// Collects non-fatal conditions (zero rows, empty documents).
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

enum class EmbeddingKind {
  kAttributesBinary,
  kAttributesContinuous,
  kBow,
  kWordVector,
  kHierarchy,
  kConcatenated,
};

std::string_view to_string(EmbeddingKind kind);
EmbeddingKind parse_embedding_kind(std::string_view tag);

/// Per-sample input embeddings theta(x) with their class labels.
///
/// `class_names` is the dataset's class list; a ClassId indexes into it.
struct InputEmbeddingSet {
  Matrix features;  // N x D
  std::vector<ClassId> labels;
  std::vector<std::string> class_names;

  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t size() const { return labels.size(); }

  // Throws ValidationError if N < 1, shapes disagree, a value is non-finite
  // or a label is out of range.
  void validate() const;

  // Samples whose label is in `classes` (sorted), in original order.
  InputEmbeddingSet subset(const std::vector<ClassId>& classes) const;
};

/// One output embedding phi(y) per class, stored as the rows of `rows`.
/// Row i belongs to the class named `class_names[i]`.
struct OutputEmbeddingTable {
  EmbeddingKind kind = EmbeddingKind::kAttributesContinuous;
  std::vector<std::string> class_names;
  Matrix rows;  // C x E

  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
  std::size_t num_classes() const { return class_names.size(); }

  void validate() const;

  // Row index of `name`, or -1.
  std::ptrdiff_t find(std::string_view name) const;

  // Reorders rows to follow `names`. Throws if a name is missing.
  OutputEmbeddingTable aligned_to(const std::vector<std::string>& names) const;
};

/// Disjoint train / val / test class sets, each sorted ascending.
struct SplitSpec {
  std::vector<ClassId> train;
  std::vector<ClassId> val;
  std::vector<ClassId> test;

  // Non-empty, sorted, unique and pairwise disjoint.
  void validate() const;
};

bool contains(const std::vector<ClassId>& sorted, ClassId c);

// Table re-indexed by `names` (a dataset's ClassIds). Classes in `needed`
// must have a row; other missing classes get a zero row.
OutputEmbeddingTable align_table(const OutputEmbeddingTable& table, const std::vector<std::string>& names,
                                 const std::vector<ClassId>& needed);

}  // namespace sje
