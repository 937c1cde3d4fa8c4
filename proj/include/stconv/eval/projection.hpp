#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stconv/tensor.hpp"

namespace stconv::eval {

/// Eigen-decomposition of a dense symmetric n x n matrix (row-major) by
/// cyclic Jacobi rotations. Values descending; vectors stored as columns.
struct EigenPairs {
  std::vector<double> values;
  std::vector<double> vectors;  // n x n, column j pairs with values[j]
};
EigenPairs jacobi_eigen(std::vector<double> matrix, std::size_t n);

struct PcaResult {
  Tensor projection;                   // [N, k]
  Tensor components;                   // [k, D], orthonormal rows
  std::vector<double> variances;       // per component
  std::vector<double> explained_ratio;  // variances / total variance
};

/// Centers the rows and projects onto the top principal axes. Uses the
/// N x N Gram matrix when N < D. Insufficient-data error for N < 2.
PcaResult project_pca(const Tensor& features, std::size_t out_dims = 2);

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double exaggeration = 4.0;
  std::size_t exaggeration_iters = 100;
  double learning_rate = 200.0;
  double momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  std::uint64_t seed = 42;
};

struct TsneAffinities {
  std::size_t n = 0;
  std::vector<double> conditional;  // n x n, rows sum to 1
  std::vector<double> joint;        // n x n, symmetric, sums to 1
  std::vector<double> row_entropy;  // achieved entropy per row (nats)
};

/// Per-row Gaussian bandwidths found by bisection to an entropy of
/// log(perplexity) within 1e-5. Invalid-config error unless
/// 1 <= perplexity < N.
TsneAffinities tsne_affinities(const Tensor& features, double perplexity);

/// Exact t-SNE embedding into two dimensions.
Tensor project_tsne(const Tensor& features, const TsneConfig& config);

}  // namespace stconv::eval
