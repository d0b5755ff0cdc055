#pragma once

#include <cstdint>
#include <vector>

#include "sje/types.hpp"

namespace sje {

// Scales every non-zero row to unit Euclidean norm. Zero rows stay zero and
// are reported through `diag`.
OutputEmbeddingTable l2_normalize_rows(const OutputEmbeddingTable& table, Diagnostics* diag = nullptr);

// Thresholds each attribute at its mean over the table's classes; a value
// strictly above the mean becomes 1, everything else 0.
OutputEmbeddingTable binarize_attributes(const OutputEmbeddingTable& table);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// Seeded random partition of `classes` into disjoint sets of the requested
// sizes. Classes beyond the requested total are left out.
SplitSpec make_split(const std::vector<ClassId>& classes, SplitCounts counts, std::uint64_t seed);

}  // namespace sje
