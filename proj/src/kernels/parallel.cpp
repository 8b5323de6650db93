#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "workbench/kernels.hpp"

namespace workbench::kernels {

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBisection = 200;

// Calibrates one row of conditional affinities.
void calibrate_row(const double* dist, std::size_t n, std::size_t i, double log_perplexity,
                   double* row) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, dist[j]);
  }
  double beta = 1.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int iter = 0; iter < kMaxBisection; ++iter) {
    sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        row[j] = 0.0;
        continue;
      }
      const double shifted = dist[j] - dmin;
      row[j] = std::exp(-beta * shifted);
      sum += row[j];
      weighted += shifted * row[j];
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    const double diff = entropy - log_perplexity;
    if (std::abs(diff) < kEntropyTolerance) break;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
    }
  }
  for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_num_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

void dot_scan(std::span<const double> rows, std::size_t dim, std::span<const double> query,
              std::span<double> out) {
  const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const double* row = rows.data() + static_cast<std::size_t>(r) * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += row[d] * query[d];
    out[static_cast<std::size_t>(r)] = acc;
  }
}

void pairwise_sq_distances(std::span<const double> points, std::size_t dim, std::span<double> out) {
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* a = points.data() + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
      const double* b = points.data() + j * dim;
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
      }
      out[i * n + j] = acc;
    }
  }
}

void conditional_affinities(std::span<const double> sq_dist, std::size_t n, double perplexity,
                            std::span<double> out) {
  const double log_perplexity = std::log(perplexity);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (n == 1) {
      out[0] = 0.0;
      continue;
    }
    calibrate_row(sq_dist.data() + i * n, n, i, log_perplexity, out.data() + i * n);
  }
}

double tsne_gradient(std::span<const double> p, double exaggeration, std::span<const double> y,
                     std::span<double> kernel, std::span<double> grad) {
  const std::size_t n = y.size() / 2;
  std::vector<double> row_sums(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        kernel[i * n + j] = 0.0;
        continue;
      }
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      kernel[i * n + j] = q;
      acc += q;
    }
    row_sums[i] = acc;
  }
  double z = 0.0;
  for (double s : row_sums) z += s;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::size_t base = i * n;
    double first = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = a[base + k] + s[base + k];
      if (v > first) {
        second = first;
        first = v;
        arg = k;
      } else if (v > second) {
        second = v;
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double update = s[base + k] - (k == arg ? second : first);
      r[base + k] = damping * r[base + k] + (1.0 - damping) * update;
    }
  }
}

void ap_availabilities(std::span<const double> r, std::span<double> a, std::size_t n,
                       double damping) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(n); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    double column = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = r[i * n + k];
      column += (i == k) ? v : std::max(v, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = r[i * n + k];
      double update = column - ((i == k) ? v : std::max(v, 0.0));
      if (i != k) update = std::min(update, 0.0);
      a[i * n + k] = damping * a[i * n + k] + (1.0 - damping) * update;
    }
  }
}

}  // namespace workbench::kernels
