// Serial reference versions of the kernels. Written as plain loops over the
// full index space; kept for testing and benchmarking the parallel versions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "workbench/kernels.hpp"

namespace workbench::kernels::reference {

void dot_scan(std::span<const double> rows, std::size_t dim, std::span<const double> query,
              std::span<double> out) {
  for (std::size_t r = 0; r < out.size(); ++r) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += rows[r * dim + d] * query[d];
    out[r] = acc;
  }
}

void pairwise_sq_distances(std::span<const double> points, std::size_t dim, std::span<double> out) {
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = points[i * dim + d] - points[j * dim + d];
        acc += diff * diff;
      }
      out[i * n + j] = acc;
    }
  }
}

void conditional_affinities(std::span<const double> sq_dist, std::size_t n, double perplexity,
                            std::span<double> out) {
  const double target = std::log(perplexity);
  if (n == 1) {
    out[0] = 0.0;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dmin = std::min(dmin, sq_dist[i * n + j]);
    }
    double beta = 1.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      sum = 0.0;
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          out[i * n + j] = 0.0;
          continue;
        }
        const double shifted = sq_dist[i * n + j] - dmin;
        out[i * n + j] = std::exp(-beta * shifted);
        sum += out[i * n + j];
        weighted += shifted * out[i * n + j];
      }
      const double diff = std::log(sum) + beta * weighted / sum - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
      }
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= sum;
  }
}

double tsne_gradient(std::span<const double> p, double exaggeration, std::span<const double> y,
                     std::span<double> kernel, std::span<double> grad) {
  const std::size_t n = y.size() / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        kernel[i * n + j] = 0.0;
        continue;
      }
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      kernel[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
      row += kernel[i * n + j];
    }
    z += row;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = kernel[i * n + j];
      const double mult = (exaggeration * p[i * n + j] - q / z) * q;
      gx += mult * (y[2 * i] - y[2 * j]);
      gy += mult * (y[2 * i + 1] - y[2 * j + 1]);
    }
    grad[2 * i] = 4.0 * gx;
    grad[2 * i + 1] = 4.0 * gy;
  }
  return z;
}

void ap_responsibilities(std::span<const double> s, std::span<const double> a, std::span<double> r,
                         std::size_t n, double damping) {
  std::vector<double> combined(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) combined[k] = a[i * n + k] + s[i * n + k];
    const auto best = std::max_element(combined.begin(), combined.end());
    const auto arg = static_cast<std::size_t>(best - combined.begin());
    const double first = *best;
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (k != arg) second = std::max(second, combined[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double update = s[i * n + k] - (k == arg ? second : first);
      r[i * n + k] = damping * r[i * n + k] + (1.0 - damping) * update;
    }
  }
}

void ap_availabilities(std::span<const double> r, std::span<double> a, std::size_t n,
                       double damping) {
  std::vector<double> clipped(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      clipped[i * n + k] = (i == k) ? r[i * n + k] : std::max(r[i * n + k], 0.0);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    double column = 0.0;
    for (std::size_t i = 0; i < n; ++i) column += clipped[i * n + k];
    for (std::size_t i = 0; i < n; ++i) {
      double update = column - clipped[i * n + k];
      if (i != k) update = std::min(update, 0.0);
      a[i * n + k] = damping * a[i * n + k] + (1.0 - damping) * update;
    }
  }
}

}  // namespace workbench::kernels::reference
