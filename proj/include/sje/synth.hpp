#pragma once

#include <cstdint>

#include "sje/model.hpp"
#include "sje/preprocess.hpp"
#include "sje/taxonomy.hpp"
#include "sje/types.hpp"

namespace sje {

struct PlantedTaskConfig {
  std::size_t input_dim = 16;   // D
  std::size_t output_dim = 8;   // E
  std::size_t num_classes = 20; // C
  std::size_t samples_per_class = 50;
  double noise = 0.0;
  SplitCounts split{12, 4, 4};
  std::uint64_t seed = 0;
  int max_attempts = 1000;
};

/// Ground-truth bilinear task: x = M phi(y) + noise, with M ~ N(0,1)^{D x E}
/// and phi(y) uniform on the unit sphere.
struct PlantedTask {
  Matrix truth;  // M, D x E
  OutputEmbeddingTable table;
  InputEmbeddingSet data;
  SplitSpec split;
  std::uint64_t seed = 0;
};

// Resamples (M, phi) until every class wins its own noiseless argmax by a
// margin; throws ValidationError after `max_attempts` failures.
PlantedTask generate_planted_task(const PlantedTaskConfig& cfg);

// Central finite-difference gradient of max_y loss(x, y_true, y) with respect
// to every entry of W. Throws KinkError when the loss argmax is not unique
// enough for the step to stay on one linear piece.
class KinkError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
Matrix oracle_loss_gradient(const CompatibilityModel& model, const Vector& x, ClassId y_true,
                            const OutputEmbeddingTable& table, std::span<const ClassId> candidates, double fd_step);

// Breadth-first search on the undirected taxonomy graph.
int oracle_path_length(const Taxonomy& tax, NodeId u, NodeId v);

// Random tree with `nodes` nodes: node i > 0 hangs below a uniformly drawn
// earlier node. Every node is a class named "n<i>".
Taxonomy random_tree(std::size_t nodes, std::uint64_t seed);

}  // namespace sje
