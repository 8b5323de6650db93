#include "workbench/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "workbench/errors.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace {

constexpr std::array<std::string_view, 12> kPalette = {
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
    "#f032e6", "#bfef45", "#469990", "#9a6324", "#800000", "#000075",
};

std::string hsv_hex(double hue, double sat, double val) {
  const double c = val * sat;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) r = c, g = x;
  else if (hp < 2) r = x, g = c;
  else if (hp < 3) g = c, b = x;
  else if (hp < 4) g = x, b = c;
  else if (hp < 5) r = x, b = c;
  else r = c, b = x;
  const double m = val - c;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

nlohmann::json point_json(const Point2& p) { return nlohmann::json::array({p.x, p.y}); }
Point2 point_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string cluster_color(std::size_t index) {
  if (index < kPalette.size()) return std::string(kPalette[index]);
  // Past the fixed palette: 360 whole-degree hues (37 is coprime to 360) in
  // four saturation/value tiers, then the index itself encoded as a color.
  const std::size_t k = index - kPalette.size();
  const double hue = static_cast<double>((k * 37) % 360);
  const std::size_t tier = (k / 360) % 4;
  std::string hex = hsv_hex(hue, 0.55 + 0.1 * static_cast<double>(tier), 0.9 - 0.1 * static_cast<double>(tier));
  if (k >= 1440) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%06zx", (0x808080 + index) & 0xffffff);
    hex = buf;
  }
  return hex;
}

std::optional<std::size_t> CanvasLayout::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < image_ids.size(); ++i) {
    if (image_ids[i] == id) return i;
  }
  return std::nullopt;
}

const Cluster* CanvasLayout::cluster_for(std::string_view image_id) const {
  const auto idx = index_of(image_id);
  if (!idx || *idx >= cluster_of.size() || cluster_of[*idx] >= clusters.size()) return nullptr;
  return &clusters[cluster_of[*idx]];
}

double min_pairwise_distance(std::span<const Point2> coords) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      best = std::min(best, std::hypot(coords[i].x - coords[j].x, coords[i].y - coords[j].y));
    }
  }
  return best;
}

std::vector<Point2> normalize_spacing(std::span<const Point2> coords, double min_dist,
                                      std::uint64_t jitter_seed) {
  std::vector<Point2> out(coords.begin(), coords.end());
  if (out.size() < 2) return out;
  for (const auto& p : out) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ContractViolation("normalize_spacing: non-finite coordinate");
    }
  }

  SplitMix64 rng(jitter_seed);
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t i = 1; i < out.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (out[i] == out[j]) {
          const double angle = 2.0 * std::numbers::pi * rng.uniform();
          out[i].x += kCoincidentJitter * std::cos(angle);
          out[i].y += kCoincidentJitter * std::sin(angle);
          moved = true;
        }
      }
    }
  }

  const double current = min_pairwise_distance(out);
  const double factor = min_dist / current;
  for (auto& p : out) {
    p.x *= factor;
    p.y *= factor;
  }
  return out;
}

ScaleOutcome apply_scale(const CanvasLayout& layout, double s) {
  ScaleOutcome out;
  out.applied = std::isnan(s) ? 1.0 : std::clamp(s, kMinScale, kMaxScale);
  out.clamped = out.applied != s;
  out.layout = layout;
  out.layout.scale = out.applied;
  out.layout.positions.resize(layout.base_positions.size());
  for (std::size_t i = 0; i < layout.base_positions.size(); ++i) {
    out.layout.positions[i] = {layout.base_positions[i].x * out.applied,
                               layout.base_positions[i].y * out.applied};
  }
  return out;
}

ClusterOutcome cluster_positions(std::span<const Point2> coords, std::span<const std::string> ids,
                                 const AffinityOptions& options) {
  if (coords.size() != ids.size()) throw ContractViolation("cluster_positions: ids/coords size mismatch");
  ClusterOutcome out;
  if (coords.empty()) return out;
  const AffinityResult ap = affinity_propagation(coords, options);
  out.degenerate = ap.degenerate;
  out.cluster_of = ap.labels;
  out.clusters.resize(ap.exemplars.size());
  for (std::size_t k = 0; k < ap.exemplars.size(); ++k) {
    out.clusters[k].id = k;
    out.clusters[k].color = k;
    out.clusters[k].exemplar_id = ids[ap.exemplars[k]];
  }
  for (std::size_t i = 0; i < ids.size(); ++i) out.clusters[ap.labels[i]].member_ids.push_back(ids[i]);
  return out;
}

CanvasLayout layout_pipeline(std::span<const std::string> image_ids,
                             std::span<const EmbeddingVector> embeddings, std::uint64_t seed,
                             const LayoutOptions& options) {
  if (image_ids.size() != embeddings.size()) {
    throw ContractViolation("layout_pipeline: one embedding per image required");
  }
  CanvasLayout layout;
  layout.reduction_seed = seed;
  layout.image_ids.assign(image_ids.begin(), image_ids.end());
  if (image_ids.empty()) return layout;

  const auto reduced = reduce_2d(embeddings, seed, options.tsne);
  layout.base_positions = normalize_spacing(reduced, options.min_spacing, mix64(seed));
  layout.positions = layout.base_positions;
  auto clustered = cluster_positions(layout.base_positions, layout.image_ids, options.affinity);
  layout.clusters = std::move(clustered.clusters);
  layout.cluster_of = std::move(clustered.cluster_of);
  layout.degenerate_clustering = clustered.degenerate;
  return layout;
}

std::vector<MinimapEntry> minimap_summary(const CanvasLayout& layout) {
  std::vector<MinimapEntry> out;
  for (const auto& cluster : layout.clusters) {
    MinimapEntry e;
    e.cluster_id = cluster.id;
    e.color = cluster_color(cluster.color);
    e.bbox_min = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    e.bbox_max = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& id : cluster.member_ids) {
      const auto idx = layout.index_of(id);
      if (!idx) throw ContractViolation("minimap_summary: cluster member missing from layout");
      const Point2 p = layout.positions[*idx];
      e.centroid.x += p.x;
      e.centroid.y += p.y;
      e.bbox_min = {std::min(e.bbox_min.x, p.x), std::min(e.bbox_min.y, p.y)};
      e.bbox_max = {std::max(e.bbox_max.x, p.x), std::max(e.bbox_max.y, p.y)};
    }
    const auto count = static_cast<double>(cluster.member_ids.size());
    e.centroid.x /= count;
    e.centroid.y /= count;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> validate_layout(const CanvasLayout& layout) {
  std::vector<std::string> problems;
  const std::size_t n = layout.image_ids.size();
  if (layout.base_positions.size() != n || layout.positions.size() != n) {
    problems.push_back("position arrays do not match image count");
    return problems;
  }
  if (layout.scale < kMinScale || layout.scale > kMaxScale) problems.push_back("scale outside [0.5, 3]");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = layout.base_positions[i];
    const auto& p = layout.positions[i];
    if (p.x != b.x * layout.scale || p.y != b.y * layout.scale) {
      problems.push_back("position of " + layout.image_ids[i] + " is not base * scale");
    }
  }
  if (n >= 2) {
    const double d = min_pairwise_distance(layout.base_positions);
    if (std::abs(d - kMinImageSpacing) > 1e-6) {
      problems.push_back("minimum base spacing is " + std::to_string(d) + ", expected 128");
    }
  }
  std::vector<int> seen(n, 0);
  std::vector<std::string> colors;
  for (std::size_t k = 0; k < layout.clusters.size(); ++k) {
    const auto& c = layout.clusters[k];
    if (c.id != k) problems.push_back("cluster ids are not dense");
    if (c.member_ids.empty()) problems.push_back("cluster " + std::to_string(c.id) + " is empty");
    if (std::find(c.member_ids.begin(), c.member_ids.end(), c.exemplar_id) == c.member_ids.end()) {
      problems.push_back("cluster " + std::to_string(c.id) + " exemplar is not a member");
    }
    colors.push_back(cluster_color(c.color));
    for (const auto& m : c.member_ids) {
      const auto idx = layout.index_of(m);
      if (!idx) {
        problems.push_back("cluster member " + m + " not in layout");
        continue;
      }
      ++seen[*idx];
      if (layout.cluster_of.size() != n || layout.cluster_of[*idx] != k) {
        problems.push_back("cluster_of disagrees with membership for " + m);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] != 1) problems.push_back(layout.image_ids[i] + " is in " + std::to_string(seen[i]) + " clusters");
  }
  std::sort(colors.begin(), colors.end());
  if (std::adjacent_find(colors.begin(), colors.end()) != colors.end()) {
    problems.push_back("cluster colors are not distinct");
  }
  return problems;
}

nlohmann::json layout_export_json(const CanvasLayout& layout) {
  nlohmann::json images = nlohmann::json::array();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    images.push_back({{"id", layout.image_ids[i]},
                      {"x", layout.positions[i].x},
                      {"y", layout.positions[i].y},
                      {"cluster", layout.cluster_of.empty() ? 0 : layout.cluster_of[i]}});
  }
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : layout.clusters) {
    clusters.push_back({{"id", c.id}, {"color", cluster_color(c.color)}, {"exemplar", c.exemplar_id}});
  }
  return {{"images", images}, {"clusters", clusters}, {"scale", layout.scale}};
}

nlohmann::json layout_to_json(const CanvasLayout& layout) {
  nlohmann::json base = nlohmann::json::array();
  for (const auto& p : layout.base_positions) base.push_back(point_json(p));
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : layout.clusters) {
    clusters.push_back(
        {{"id", c.id}, {"members", c.member_ids}, {"exemplar", c.exemplar_id}, {"color", c.color}});
  }
  return {{"image_ids", layout.image_ids},
          {"base_positions", base},
          {"scale", layout.scale},
          {"clusters", clusters},
          {"cluster_of", layout.cluster_of},
          {"reduction_seed", layout.reduction_seed},
          {"degenerate_clustering", layout.degenerate_clustering}};
}

CanvasLayout layout_from_json(const nlohmann::json& j) {
  CanvasLayout layout;
  layout.image_ids = j.at("image_ids").get<std::vector<std::string>>();
  for (const auto& p : j.at("base_positions")) layout.base_positions.push_back(point_from(p));
  for (const auto& c : j.at("clusters")) {
    layout.clusters.push_back({c.at("id").get<std::size_t>(), c.at("members").get<std::vector<std::string>>(),
                               c.at("exemplar").get<std::string>(), c.at("color").get<std::size_t>()});
  }
  layout.cluster_of = j.at("cluster_of").get<std::vector<std::size_t>>();
  layout.reduction_seed = j.at("reduction_seed").get<std::uint64_t>();
  layout.degenerate_clustering = j.at("degenerate_clustering").get<bool>();
  return apply_scale(layout, j.at("scale").get<double>()).layout;
}

}  // namespace workbench
