#include "workbench/affinity_propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "workbench/errors.hpp"
#include "workbench/kernels.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace {

AffinityResult singletons(std::size_t n, double preference, int iterations, bool degenerate) {
  AffinityResult r;
  r.labels.resize(n);
  r.exemplars.resize(n);
  std::iota(r.labels.begin(), r.labels.end(), 0);
  std::iota(r.exemplars.begin(), r.exemplars.end(), 0);
  r.preference = preference;
  r.iterations = iterations;
  r.converged = !degenerate;
  r.degenerate = degenerate;
  return r;
}

// Index of the exemplar in `exemplars` that row i is most similar to.
std::size_t nearest_exemplar(std::span<const double> s, std::size_t n, std::size_t i,
                             const std::vector<std::size_t>& exemplars) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < exemplars.size(); ++k) {
    const double v = s[i * n + exemplars[k]];
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> assign(std::span<const double> s, std::size_t n,
                                const std::vector<std::size_t>& exemplars) {
  std::vector<std::size_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = nearest_exemplar(s, n, i, exemplars);
  for (std::size_t k = 0; k < exemplars.size(); ++k) c[exemplars[k]] = k;
  return c;
}

}  // namespace

double median_similarity(std::span<const double> similarity, std::size_t n) {
  if (n == 0) return 0.0;
  std::vector<double> values(similarity.begin(), similarity.begin() + static_cast<std::ptrdiff_t>(n * n));
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 ? values[m / 2] : (values[m / 2 - 1] + values[m / 2]) / 2.0;
}

std::vector<double> negative_sq_distance_matrix(std::span<const Point2> points) {
  const std::size_t n = points.size();
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      s[i * n + j] = -(dx * dx + dy * dy);
    }
  }
  return s;
}

AffinityResult affinity_propagation(std::span<const Point2> points, const AffinityOptions& options) {
  const auto s = negative_sq_distance_matrix(points);
  return affinity_propagation(s, points.size(), options);
}

AffinityResult affinity_propagation(std::span<const double> similarity, std::size_t n,
                                    const AffinityOptions& options) {
  if (similarity.size() != n * n) throw ContractViolation("affinity_propagation: matrix is not n x n");
  if (!(options.damping >= 0.5 && options.damping < 1.0)) {
    throw ContractViolation("affinity_propagation: damping must be in [0.5, 1)");
  }
  if (n == 0) return {};
  const double preference = options.preference.value_or(median_similarity(similarity, n));
  if (n == 1) return singletons(1, preference, 0, false);

  // All off-diagonal similarities equal: message passing has nothing to break
  // the symmetry, so decide directly.
  bool all_equal = true;
  double first_off = similarity[1];
  for (std::size_t i = 0; i < n && all_equal; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && similarity[i * n + j] != first_off) {
        all_equal = false;
        break;
      }
    }
  }
  if (all_equal) {
    if (preference > first_off) return singletons(n, preference, 0, false);
    AffinityResult r;
    r.labels.assign(n, 0);
    r.exemplars = {0};
    r.preference = preference;
    r.converged = true;
    return r;
  }

  std::vector<double> s(similarity.begin(), similarity.end());
  for (std::size_t i = 0; i < n; ++i) s[i * n + i] = preference;
  SplitMix64 rng(options.noise_seed);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = std::numeric_limits<double>::min();
  for (double& v : s) v += (kEps * v + kTiny * 100.0) * rng.normal();

  std::vector<double> a(n * n, 0.0);
  std::vector<double> r(n * n, 0.0);
  const auto window = static_cast<std::size_t>(options.convergence_iter);
  std::vector<std::uint8_t> history(n * window, 0);
  std::vector<std::uint8_t> is_exemplar(n, 0);

  bool converged = false;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    if (options.parallel) {
      kernels::ap_responsibilities(s, a, r, n, options.damping);
      kernels::ap_availabilities(r, a, n, options.damping);
    } else {
      kernels::reference::ap_responsibilities(s, a, r, n, options.damping);
      kernels::reference::ap_availabilities(r, a, n, options.damping);
    }
    std::size_t count = 0;
    const std::size_t slot = static_cast<std::size_t>(it) % window;
    for (std::size_t i = 0; i < n; ++i) {
      is_exemplar[i] = (a[i * n + i] + r[i * n + i]) > 0.0;
      history[i * window + slot] = is_exemplar[i];
      count += is_exemplar[i];
    }
    if (static_cast<std::size_t>(it) >= window) {
      std::size_t stable = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t sum = 0;
        for (std::size_t w = 0; w < window; ++w) sum += history[i * window + w];
        if (sum == 0 || sum == window) ++stable;
      }
      if (stable == n && count > 0) {
        converged = true;
        break;
      }
    }
  }
  const int iterations = converged ? it + 1 : options.max_iter;
  if (!converged) return singletons(n, preference, iterations, true);

  std::vector<std::size_t> exemplars;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_exemplar[i]) exemplars.push_back(i);
  }

  // Refine: each cluster elects the member with the largest summed similarity
  // to its fellow members, then points are reassigned.
  std::vector<std::size_t> c = assign(s, n, exemplars);
  for (std::size_t k = 0; k < exemplars.size(); ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (c[i] == k) members.push_back(i);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t cand : members) {
      double total = 0.0;
      for (std::size_t m : members) total += s[m * n + cand];
      if (total > best) {
        best = total;
        exemplars[k] = cand;
      }
    }
  }
  c = assign(s, n, exemplars);

  std::vector<std::size_t> centers;
  for (std::size_t k : c) centers.push_back(exemplars[k]);
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());

  AffinityResult out;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ex = exemplars[c[i]];
    out.labels[i] = static_cast<std::size_t>(std::lower_bound(centers.begin(), centers.end(), ex) -
                                             centers.begin());
  }
  out.exemplars = std::move(centers);
  out.preference = preference;
  out.iterations = iterations;
  out.converged = true;
  return out;
}

double net_similarity(std::span<const double> similarity, std::size_t n, double preference,
                      const AffinityResult& result) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ex = result.exemplars[result.labels[i]];
    total += (ex == i) ? preference : similarity[i * n + ex];
  }
  return total;
}

}  // namespace workbench
