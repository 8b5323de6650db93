#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "workbench/tsne.hpp"

namespace workbench {

struct AffinityOptions {
  double damping = 0.5;
  int max_iter = 200;
  int convergence_iter = 15;
  // Self-similarity. Default: median of the whole matrix, diagonal included,
  // as scikit-learn computes it.
  std::optional<double> preference;
  // Seed for the tiny similarity jitter that breaks exact ties.
  std::uint64_t noise_seed = 0;
  bool parallel = true;
};

struct AffinityResult {
  std::vector<std::size_t> labels;     // cluster index per point
  std::vector<std::size_t> exemplars;  // point index per cluster, ascending
  double preference = 0.0;
  int iterations = 0;
  bool converged = false;
  // Non-convergence: every point becomes its own exemplar.
  bool degenerate = false;
};

// Dense affinity propagation on an n x n similarity matrix (diagonal ignored;
// it is replaced by the preference). Message schedule, convergence test and
// the final exemplar refinement follow the scikit-learn implementation.
AffinityResult affinity_propagation(std::span<const double> similarity, std::size_t n,
                                    const AffinityOptions& options = {});

// Similarity = negative squared Euclidean distance.
std::vector<double> negative_sq_distance_matrix(std::span<const Point2> points);
AffinityResult affinity_propagation(std::span<const Point2> points,
                                    const AffinityOptions& options = {});

double median_similarity(std::span<const double> similarity, std::size_t n);

// Sum of exemplar preferences plus each non-exemplar's similarity to its
// assigned exemplar.
double net_similarity(std::span<const double> similarity, std::size_t n, double preference,
                      const AffinityResult& result);

}  // namespace workbench
