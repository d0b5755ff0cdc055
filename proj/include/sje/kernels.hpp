#pragma once

#include <span>
#include <vector>

#include "sje/types.hpp"

// Batch scoring kernels. Every kernel has a plain-loop serial reference
// (`*_serial`) used by the tests and the benchmark, and an OpenMP version
// parallel over samples. Each sample's result is computed by one thread in a
// fixed order, so the OpenMP output does not depend on the thread count.
namespace sje::kernels {

// scores(n, c) = features.row(n) * W * phi.row(c)^T. Shapes N x D, D x E, C x E.
Matrix score_matrix(const Matrix& features, const Matrix& W, const Matrix& phi);
Matrix score_matrix_serial(const Matrix& features, const Matrix& W, const Matrix& phi);

// Column index of each row's maximum; ties go to the lowest column.
std::vector<std::size_t> argmax_rows(const Matrix& scores);
std::vector<std::size_t> argmax_rows_serial(const Matrix& scores);

// Row-wise argmax of sum_k alpha[k] * scores[k]; ties go to the lowest column.
std::vector<std::size_t> weighted_argmax_rows(std::span<const Matrix> scores, std::span<const double> alpha);
std::vector<std::size_t> weighted_argmax_rows_serial(std::span<const Matrix> scores, std::span<const double> alpha);

}  // namespace sje::kernels
