#include "sje/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace sje {

namespace {

double per_sample_loss(const Matrix& W, const Vector& x, ClassId y_true, const OutputEmbeddingTable& table,
                       std::span<const ClassId> candidates) {
  Eigen::RowVectorXd projected = x.transpose() * W;
  const double true_score = projected.dot(table.rows.row(static_cast<Eigen::Index>(index_of(y_true))));
  double best = 0.0;
  for (ClassId c : candidates) {
    if (c == y_true) continue;
    best = std::max(best, 1.0 + projected.dot(table.rows.row(static_cast<Eigen::Index>(index_of(c)))) - true_score);
  }
  return best;
}

}  // namespace

PlantedTask generate_planted_task(const PlantedTaskConfig& cfg) {
  const auto D = static_cast<Eigen::Index>(cfg.input_dim);
  const auto E = static_cast<Eigen::Index>(cfg.output_dim);
  const auto C = static_cast<Eigen::Index>(cfg.num_classes);
  if (D < 2 || E < 2 || C < 2) throw ValidationError("planted task: D, E and C must be at least 2");
  if (cfg.samples_per_class < 1) throw ValidationError("planted task: need at least one sample per class");
  if (!(cfg.noise >= 0.0)) throw ValidationError("planted task: noise must be non-negative");
  if (cfg.split.train + cfg.split.val + cfg.split.test > cfg.num_classes) {
    throw ValidationError("planted task: split counts exceed the number of classes");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PlantedTask task;
  task.seed = cfg.seed;

  bool separable = false;
  for (int attempt = 0; attempt < cfg.max_attempts && !separable; ++attempt) {
    task.truth.resize(D, E);
    for (Eigen::Index i = 0; i < D; ++i) {
      for (Eigen::Index j = 0; j < E; ++j) task.truth(i, j) = gauss(rng);
    }
    Matrix phi(C, E);
    for (Eigen::Index c = 0; c < C; ++c) {
      for (Eigen::Index j = 0; j < E; ++j) phi(c, j) = gauss(rng);
      double norm = phi.row(c).norm();
      if (norm == 0.0) {
        phi(c, 0) = 1.0;
        norm = 1.0;
      }
      phi.row(c) /= norm;
    }
    // Noiseless scores: S = Phi G Phi^T with G = M^T M. Class c must beat
    // every other class on its own clean sample.
    Matrix gram = task.truth.transpose() * task.truth;
    Matrix scores = phi * gram * phi.transpose();
    separable = true;
    for (Eigen::Index c = 0; c < C && separable; ++c) {
      double own = scores(c, c);
      for (Eigen::Index o = 0; o < C; ++o) {
        if (o != c && !(own - scores(c, o) > 1e-6 * std::abs(own))) {
          separable = false;
          break;
        }
      }
    }
    if (separable) {
      task.table.kind = EmbeddingKind::kAttributesContinuous;
      task.table.rows = std::move(phi);
    }
  }
  if (!separable) {
    throw ValidationError("planted task: no separable instance after " + std::to_string(cfg.max_attempts) +
                          " attempts (is C much larger than E?)");
  }

  task.table.class_names.clear();
  for (Eigen::Index c = 0; c < C; ++c) task.table.class_names.push_back("class" + std::to_string(c));

  const auto N = static_cast<Eigen::Index>(cfg.samples_per_class) * C;
  task.data.class_names = task.table.class_names;
  task.data.features.resize(N, D);
  task.data.labels.reserve(static_cast<std::size_t>(N));
  Eigen::Index n = 0;
  for (Eigen::Index c = 0; c < C; ++c) {
    Eigen::RowVectorXd clean = (task.truth * task.table.rows.row(c).transpose()).transpose();
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s, ++n) {
      task.data.features.row(n) = clean;
      if (cfg.noise > 0.0) {
        for (Eigen::Index i = 0; i < D; ++i) task.data.features(n, i) += cfg.noise * gauss(rng);
      }
      task.data.labels.push_back(class_at(static_cast<std::size_t>(c)));
    }
  }

  std::vector<ClassId> all;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) all.push_back(class_at(c));
  task.split = make_split(all, cfg.split, rng());
  return task;
}

Matrix oracle_loss_gradient(const CompatibilityModel& model, const Vector& x, ClassId y_true,
                            const OutputEmbeddingTable& table, std::span<const ClassId> candidates, double fd_step) {
  if (!(fd_step > 0.0)) throw ValidationError("oracle gradient: step must be positive");
  if (std::find(candidates.begin(), candidates.end(), y_true) == candidates.end()) {
    throw ValidationError("oracle gradient: true class is not a candidate");
  }

  // Losses at W; the two largest must be far enough apart that no single
  // perturbation of size fd_step can reorder them.
  Eigen::RowVectorXd projected = x.transpose() * model.W;
  const auto phi_true = table.rows.row(static_cast<Eigen::Index>(index_of(y_true)));
  const double true_score = projected.dot(phi_true);
  std::vector<double> losses;
  double phi_spread = 0.0;
  for (ClassId c : candidates) {
    const auto phi = table.rows.row(static_cast<Eigen::Index>(index_of(c)));
    losses.push_back(c == y_true ? 0.0 : 1.0 + projected.dot(phi) - true_score);
    phi_spread = std::max(phi_spread, (phi - phi_true).cwiseAbs().maxCoeff());
  }
  if (losses.size() > 1) {
    std::partial_sort(losses.begin(), losses.begin() + 2, losses.end(), std::greater<>());
    const double max_shift = fd_step * x.cwiseAbs().maxCoeff() * phi_spread;
    if (losses[0] - losses[1] <= 4.0 * max_shift) throw KinkError("oracle gradient: loss argmax is not unique");
  }

  Matrix grad(model.W.rows(), model.W.cols());
  Matrix W = model.W;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      const double saved = W(i, j);
      W(i, j) = saved + fd_step;
      const double up = per_sample_loss(W, x, y_true, table, candidates);
      W(i, j) = saved - fd_step;
      const double down = per_sample_loss(W, x, y_true, table, candidates);
      W(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * fd_step);
    }
  }
  return grad;
}

int oracle_path_length(const Taxonomy& tax, NodeId u, NodeId v) {
  std::vector<int> dist(tax.num_nodes(), -1);
  std::deque<NodeId> queue{u};
  dist[u] = 0;
  while (!queue.empty()) {
    NodeId n = queue.front();
    queue.pop_front();
    if (n == v) return dist[n];
    auto visit = [&](NodeId m) {
      if (dist[m] < 0) {
        dist[m] = dist[n] + 1;
        queue.push_back(m);
      }
    };
    for (NodeId m : tax.parents(n)) visit(m);
    for (NodeId m : tax.children(n)) visit(m);
  }
  throw ValidationError("oracle path: nodes are disconnected");
}

Taxonomy random_tree(std::size_t nodes, std::uint64_t seed) {
  if (nodes < 1) throw ValidationError("random tree: need at least one node");
  std::mt19937_64 rng(seed);
  std::vector<TaxonomyEdge> edges;
  std::vector<LeafSpec> leaves;
  for (std::size_t i = 1; i < nodes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    edges.push_back({"n" + std::to_string(pick(rng)), "n" + std::to_string(i)});
  }
  for (std::size_t i = 0; i < nodes; ++i) leaves.push_back({"n" + std::to_string(i), "n" + std::to_string(i), {}});
  return Taxonomy::build(edges, leaves);
}

}  // namespace sje
