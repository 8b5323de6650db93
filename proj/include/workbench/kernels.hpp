#pragma once

// Data-parallel inner loops used by retrieval, layout and clustering.
//
// Every kernel in workbench::kernels has a serial twin in
// workbench::kernels::reference. Each output element is produced by one
// thread with the same floating-point operation order as the serial twin, and
// cross-row reductions are finished serially, so both versions agree bit for
// bit regardless of thread count. The tests hold them to that.

#include <cstddef>
#include <span>

namespace workbench::kernels {

// out[r] = dot(rows[r*dim .. r*dim+dim), query)
void dot_scan(std::span<const double> rows, std::size_t dim, std::span<const double> query,
              std::span<double> out);

// out[i*n + j] = squared Euclidean distance between points i and j.
void pairwise_sq_distances(std::span<const double> points, std::size_t dim, std::span<double> out);

// Row-stochastic Gaussian affinities P(j|i), each row calibrated by bisection
// on the precision so its entropy matches log(perplexity). Diagonal is zero.
void conditional_affinities(std::span<const double> sq_dist, std::size_t n, double perplexity,
                            std::span<double> out);

// Exact t-SNE gradient for a 2-D map y (n x 2, row-major) and joint affinities
// p (n x n) scaled by `exaggeration`. `kernel` receives the Student-t numerators.
// Returns the normalizer Z = sum of numerators over i != j.
double tsne_gradient(std::span<const double> p, double exaggeration, std::span<const double> y,
                     std::span<double> kernel, std::span<double> grad);

// Damped affinity propagation message updates on dense n x n matrices.
void ap_responsibilities(std::span<const double> s, std::span<const double> a, std::span<double> r,
                         std::size_t n, double damping);
void ap_availabilities(std::span<const double> r, std::span<double> a, std::size_t n,
                       double damping);

namespace reference {

void dot_scan(std::span<const double> rows, std::size_t dim, std::span<const double> query,
              std::span<double> out);
void pairwise_sq_distances(std::span<const double> points, std::size_t dim, std::span<double> out);
void conditional_affinities(std::span<const double> sq_dist, std::size_t n, double perplexity,
                            std::span<double> out);
double tsne_gradient(std::span<const double> p, double exaggeration, std::span<const double> y,
                     std::span<double> kernel, std::span<double> grad);
void ap_responsibilities(std::span<const double> s, std::span<const double> a, std::span<double> r,
                         std::size_t n, double damping);
void ap_availabilities(std::span<const double> r, std::span<double> a, std::size_t n,
                       double damping);

}  // namespace reference

int max_threads();
void set_num_threads(int n);

}  // namespace workbench::kernels
