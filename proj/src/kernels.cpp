#include "sje/kernels.hpp"

namespace sje::kernels {

namespace {

void check_shapes(const Matrix& features, const Matrix& W, const Matrix& phi) {
  if (features.cols() != W.rows() || W.cols() != phi.cols()) {
    throw ValidationError("score_matrix: dimension mismatch");
  }
}

void check_stack(std::span<const Matrix> scores, std::span<const double> alpha) {
  if (scores.empty() || scores.size() != alpha.size()) {
    throw ValidationError("weighted_argmax_rows: need one weight per score matrix");
  }
  for (const auto& s : scores) {
    if (s.rows() != scores[0].rows() || s.cols() != scores[0].cols()) {
      throw ValidationError("weighted_argmax_rows: score matrices differ in shape");
    }
  }
}

}  // namespace

Matrix score_matrix(const Matrix& features, const Matrix& W, const Matrix& phi) {
  check_shapes(features, W, phi);
  const Eigen::Index n_samples = features.rows();
  Matrix scores(n_samples, phi.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    Eigen::RowVectorXd projected = features.row(n) * W;
    scores.row(n).noalias() = projected * phi.transpose();
  }
  return scores;
}

Matrix score_matrix_serial(const Matrix& features, const Matrix& W, const Matrix& phi) {
  check_shapes(features, W, phi);
  const Eigen::Index N = features.rows(), D = W.rows(), E = W.cols(), C = phi.rows();
  Matrix scores = Matrix::Zero(N, C);
  std::vector<double> projected(static_cast<std::size_t>(E));
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index e = 0; e < E; ++e) {
      double acc = 0.0;
      for (Eigen::Index d = 0; d < D; ++d) acc += features(n, d) * W(d, e);
      projected[static_cast<std::size_t>(e)] = acc;
    }
    for (Eigen::Index c = 0; c < C; ++c) {
      double acc = 0.0;
      for (Eigen::Index e = 0; e < E; ++e) acc += projected[static_cast<std::size_t>(e)] * phi(c, e);
      scores(n, c) = acc;
    }
  }
  return scores;
}

std::vector<std::size_t> argmax_rows(const Matrix& scores) {
  const Eigen::Index N = scores.rows(), C = scores.cols();
  std::vector<std::size_t> best(static_cast<std::size_t>(N), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < N; ++n) {
    Eigen::Index arg = 0;
    for (Eigen::Index c = 1; c < C; ++c) {
      if (scores(n, c) > scores(n, arg)) arg = c;
    }
    best[static_cast<std::size_t>(n)] = static_cast<std::size_t>(arg);
  }
  return best;
}

std::vector<std::size_t> argmax_rows_serial(const Matrix& scores) {
  std::vector<std::size_t> best;
  best.reserve(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index n = 0; n < scores.rows(); ++n) {
    std::size_t arg = 0;
    double top = scores(n, 0);
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(n, c) > top) {
        top = scores(n, c);
        arg = static_cast<std::size_t>(c);
      }
    }
    best.push_back(arg);
  }
  return best;
}

std::vector<std::size_t> weighted_argmax_rows(std::span<const Matrix> scores, std::span<const double> alpha) {
  check_stack(scores, alpha);
  const Eigen::Index N = scores[0].rows(), C = scores[0].cols();
  const std::size_t K = scores.size();
  std::vector<std::size_t> best(static_cast<std::size_t>(N), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < N; ++n) {
    std::size_t arg = 0;
    double top = 0.0;
    for (Eigen::Index c = 0; c < C; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += alpha[k] * scores[k](n, c);
      if (c == 0 || s > top) {
        top = s;
        arg = static_cast<std::size_t>(c);
      }
    }
    best[static_cast<std::size_t>(n)] = arg;
  }
  return best;
}

std::vector<std::size_t> weighted_argmax_rows_serial(std::span<const Matrix> scores, std::span<const double> alpha) {
  check_stack(scores, alpha);
  Matrix combined = Matrix::Zero(scores[0].rows(), scores[0].cols());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    for (Eigen::Index n = 0; n < combined.rows(); ++n) {
      for (Eigen::Index c = 0; c < combined.cols(); ++c) combined(n, c) += alpha[k] * scores[k](n, c);
    }
  }
  return argmax_rows_serial(combined);
}

}  // namespace sje::kernels
