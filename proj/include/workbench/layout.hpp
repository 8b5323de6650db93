#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "workbench/affinity_propagation.hpp"
#include "workbench/embedding.hpp"
#include "workbench/tsne.hpp"

namespace workbench {

inline constexpr double kMinImageSpacing = 128.0;
inline constexpr double kMinScale = 0.5;
inline constexpr double kMaxScale = 3.0;
inline constexpr double kCoincidentJitter = 1e-3;

struct Cluster {
  std::size_t id = 0;
  std::vector<std::string> member_ids;
  std::string exemplar_id;
  std::size_t color = 0;  // index into cluster_color()

  bool operator==(const Cluster&) const = default;
};

// "#rrggbb"; distinct for distinct indices.
std::string cluster_color(std::size_t index);

struct CanvasLayout {
  std::vector<std::string> image_ids;
  std::vector<Point2> base_positions;
  std::vector<Point2> positions;  // base_positions * scale
  double scale = 1.0;
  std::vector<Cluster> clusters;
  std::vector<std::size_t> cluster_of;  // per image, index into clusters
  std::uint64_t reduction_seed = 0;
  bool degenerate_clustering = false;

  std::size_t size() const noexcept { return image_ids.size(); }
  bool empty() const noexcept { return image_ids.empty(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
  const Cluster* cluster_for(std::string_view image_id) const;

  bool operator==(const CanvasLayout&) const = default;
};

// Scales every coordinate by min_dist / (smallest pairwise distance). Exact
// duplicates are first nudged apart by kCoincidentJitter in a seeded direction.
// Fewer than two points are returned unchanged.
std::vector<Point2> normalize_spacing(std::span<const Point2> coords,
                                      double min_dist = kMinImageSpacing,
                                      std::uint64_t jitter_seed = 0);

double min_pairwise_distance(std::span<const Point2> coords);

struct ScaleOutcome {
  CanvasLayout layout;
  double applied = 1.0;
  bool clamped = false;
};

// positions = base_positions * clamp(s, 0.5, 3). Always computed from the
// base positions, so repeated calls do not compound.
ScaleOutcome apply_scale(const CanvasLayout& layout, double s);

struct ClusterOutcome {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> cluster_of;
  bool degenerate = false;
};

// Affinity propagation over screen positions (similarity = -squared distance).
ClusterOutcome cluster_positions(std::span<const Point2> coords, std::span<const std::string> ids,
                                 const AffinityOptions& options = {});

struct LayoutOptions {
  TsneOptions tsne;
  AffinityOptions affinity;
  double min_spacing = kMinImageSpacing;
};

// reduce_2d -> normalize_spacing -> cluster_positions -> colors by cluster id.
CanvasLayout layout_pipeline(std::span<const std::string> image_ids,
                             std::span<const EmbeddingVector> embeddings, std::uint64_t seed,
                             const LayoutOptions& options = {});

struct MinimapEntry {
  std::size_t cluster_id = 0;
  std::string color;
  Point2 centroid;
  Point2 bbox_min;
  Point2 bbox_max;
};

std::vector<MinimapEntry> minimap_summary(const CanvasLayout& layout);

// Every CanvasLayout invariant; empty when the layout is sound.
std::vector<std::string> validate_layout(const CanvasLayout& layout);

// {images:[{id,x,y,cluster}], clusters:[{id,color,exemplar}], scale}
nlohmann::json layout_export_json(const CanvasLayout& layout);
// Lossless form used for persistence.
nlohmann::json layout_to_json(const CanvasLayout& layout);
CanvasLayout layout_from_json(const nlohmann::json& j);

}  // namespace workbench
