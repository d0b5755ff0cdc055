#include "sje/preprocess.hpp"

#include <algorithm>
#include <random>

namespace sje {

OutputEmbeddingTable l2_normalize_rows(const OutputEmbeddingTable& table, Diagnostics* diag) {
  OutputEmbeddingTable out = table;
  for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
    double norm = out.rows.row(i).norm();
    if (norm == 0.0) {
      if (diag) diag->warn("zero row for class '" + out.class_names[static_cast<std::size_t>(i)] + "' left unnormalized");
      continue;
    }
    out.rows.row(i) /= norm;
  }
  // Normalized binary rows are no longer in {0,1}.
  if (out.kind == EmbeddingKind::kAttributesBinary) out.kind = EmbeddingKind::kAttributesContinuous;
  return out;
}

OutputEmbeddingTable binarize_attributes(const OutputEmbeddingTable& table) {
  if (table.kind != EmbeddingKind::kAttributesContinuous) {
    throw ValidationError("binarize: table kind must be attributes-continuous, got '" +
                          std::string(to_string(table.kind)) + "'");
  }
  OutputEmbeddingTable out = table;
  out.kind = EmbeddingKind::kAttributesBinary;
  for (Eigen::Index j = 0; j < table.rows.cols(); ++j) {
    double mean = table.rows.col(j).mean();
    for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
      out.rows(i, j) = table.rows(i, j) > mean ? 1.0 : 0.0;
    }
  }
  return out;
}

SplitSpec make_split(const std::vector<ClassId>& classes, SplitCounts counts, std::uint64_t seed) {
  std::vector<ClassId> pool = classes;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (counts.train + counts.val + counts.test > pool.size()) {
    throw ValidationError("make_split: requested " + std::to_string(counts.train + counts.val + counts.test) +
                          " classes but only " + std::to_string(pool.size()) + " are available");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);

  SplitSpec split;
  auto take = [&](std::size_t from, std::size_t n) {
    std::vector<ClassId> v(pool.begin() + static_cast<std::ptrdiff_t>(from),
                           pool.begin() + static_cast<std::ptrdiff_t>(from + n));
    std::sort(v.begin(), v.end());
    return v;
  };
  split.train = take(0, counts.train);
  split.val = take(counts.train, counts.val);
  split.test = take(counts.train + counts.val, counts.test);
  return split;
}

}  // namespace sje
