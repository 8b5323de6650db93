#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "workbench/embedding.hpp"

namespace workbench {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

// Exact (O(N^2) per iteration) t-SNE. Defaults follow the reference
// implementation: 1000 iterations, exaggeration 12 for the first 250, momentum
// 0.5 -> 0.8 at 250, learning rate 200, per-coordinate adaptive gains.
struct TsneOptions {
  int max_iter = 1000;
  int exaggeration_iters = 250;
  double exaggeration = 12.0;
  double learning_rate = 200.0;
  double momentum_start = 0.5;
  double momentum_final = 0.8;
  int momentum_switch_iter = 250;
  double min_gain = 0.01;
  double init_stddev = 1e-4;
  std::optional<double> perplexity;  // default: auto_perplexity(N)
  bool parallel = true;
};

// min(30, max(1, floor((N - 1) / 3)))
double auto_perplexity(std::size_t n);

// Deterministic in (inputs, seed). N = 0 -> empty, N = 1 -> origin.
// Non-finite or mixed-dimension inputs -> ContractViolation.
std::vector<Point2> reduce_2d(std::span<const EmbeddingVector> embeddings, std::uint64_t seed,
                              const TsneOptions& options = {});
std::vector<Point2> reduce_2d(std::span<const double> rows, std::size_t dim, std::uint64_t seed,
                              const TsneOptions& options = {});

}  // namespace workbench
