#include "workbench/tsne.hpp"

#include <algorithm>
#include <cmath>

#include "workbench/errors.hpp"
#include "workbench/kernels.hpp"
#include "workbench/util.hpp"

namespace workbench {

double auto_perplexity(std::size_t n) {
  const double third = n == 0 ? 0.0 : std::floor(static_cast<double>(n - 1) / 3.0);
  return std::min(30.0, std::max(1.0, third));
}

std::vector<Point2> reduce_2d(std::span<const EmbeddingVector> embeddings, std::uint64_t seed,
                              const TsneOptions& options) {
  if (embeddings.empty()) return {};
  const std::size_t dim = embeddings.front().dimension();
  std::vector<double> rows;
  rows.reserve(embeddings.size() * dim);
  for (const auto& e : embeddings) {
    if (e.dimension() != dim) throw ContractViolation("reduce_2d: embeddings differ in dimension");
    rows.insert(rows.end(), e.values.begin(), e.values.end());
  }
  return reduce_2d(rows, dim, seed, options);
}

std::vector<Point2> reduce_2d(std::span<const double> rows, std::size_t dim, std::uint64_t seed,
                              const TsneOptions& options) {
  if (dim == 0 || rows.empty()) return {};
  if (rows.size() % dim != 0) throw ContractViolation("reduce_2d: ragged input matrix");
  for (double v : rows) {
    if (!std::isfinite(v)) throw ContractViolation("reduce_2d: non-finite embedding component");
  }
  const std::size_t n = rows.size() / dim;
  if (n == 1) return {Point2{0.0, 0.0}};

  const bool par = options.parallel;
  const double perplexity = options.perplexity.value_or(auto_perplexity(n));

  std::vector<double> dist(n * n);
  std::vector<double> p(n * n);
  if (par) {
    kernels::pairwise_sq_distances(rows, dim, dist);
    kernels::conditional_affinities(dist, n, perplexity, p);
  } else {
    kernels::reference::pairwise_sq_distances(rows, dim, dist);
    kernels::reference::conditional_affinities(dist, n, perplexity, p);
  }

  // Symmetrize into joint probabilities.
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max((p[i * n + j] + p[j * n + i]) / denom, 1e-12);
      p[i * n + j] = v;
      p[j * n + i] = v;
    }
  }

  SplitMix64 rng(seed);
  std::vector<double> y(2 * n);
  for (double& v : y) v = rng.normal() * options.init_stddev;

  std::vector<double> grad(2 * n);
  std::vector<double> update(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);
  std::vector<double> kernel(n * n);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const double exaggeration = iter < options.exaggeration_iters ? options.exaggeration : 1.0;
    const double momentum =
        iter < options.momentum_switch_iter ? options.momentum_start : options.momentum_final;
    if (par) {
      kernels::tsne_gradient(p, exaggeration, y, kernel, grad);
    } else {
      kernels::reference::tsne_gradient(p, exaggeration, y, kernel, grad);
    }
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const bool same_sign = (grad[i] > 0) == (update[i] > 0);
      gains[i] = same_sign ? gains[i] * 0.8 : gains[i] + 0.2;
      gains[i] = std::max(gains[i], options.min_gain);
      update[i] = momentum * update[i] - options.learning_rate * gains[i] * grad[i];
      y[i] += update[i];
    }
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cx += y[2 * i];
      cy += y[2 * i + 1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= cx;
      y[2 * i + 1] -= cy;
    }
  }

  std::vector<Point2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

}  // namespace workbench
