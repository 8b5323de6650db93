#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "workbench/embedding.hpp"
#include "workbench/layout.hpp"

namespace workbench {

inline constexpr std::size_t kDefaultMenuSize = 15;

enum class ModifierCategory { phrase, artist };

std::string to_string(ModifierCategory c);

struct ModifierEntry {
  std::string phrase;
  ModifierCategory category = ModifierCategory::phrase;
  bool operator==(const ModifierEntry&) const = default;
};

struct ScoredModifier {
  std::string phrase;
  ModifierCategory category = ModifierCategory::phrase;
  double score = 0.0;
  bool operator==(const ScoredModifier&) const = default;
};

struct TsvModifiers {
  std::vector<ModifierEntry> entries;
  std::size_t malformed = 0;
};

// `phrase<TAB>category` lines; blank lines and lines starting with '#' are skipped.
TsvModifiers read_modifier_tsv(std::istream& in);

// Phrases are unique case-insensitively (first occurrence wins). Embeddings
// are text-modality and computed once, at construction.
class ModifierCorpus {
 public:
  ModifierCorpus() = default;
  ModifierCorpus(std::vector<ModifierEntry> entries, const EmbeddingProvider& provider);
  // Pre-computed embeddings, one per entry; duplicates are still dropped.
  ModifierCorpus(std::vector<ModifierEntry> entries, std::span<const EmbeddingVector> embeddings);

  static ModifierCorpus load(const std::filesystem::path& tsv, const EmbeddingProvider& provider);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& provider_id() const noexcept { return provider_id_; }
  const std::vector<ModifierEntry>& entries() const noexcept { return entries_; }
  std::span<const double> matrix() const noexcept { return matrix_; }
  bool contains(std::string_view phrase) const;

 private:
  std::vector<ModifierEntry> entries_;
  std::vector<double> matrix_;  // unit rows
  std::size_t dimension_ = 0;
  std::string provider_id_;
};

// Ranked by descending score, ties by ascending phrase; at most top_n.
std::vector<ScoredModifier> rank_scores(const ModifierCorpus& corpus, std::span<const double> scores,
                                        std::size_t top_n);

// Cosine similarity to an image embedding.
std::vector<ScoredModifier> score_modifiers(const ModifierCorpus& corpus, const EmbeddingVector& image_embedding,
                                            std::size_t top_n = kDefaultMenuSize);

// Mean cosine similarity over the members.
std::vector<ScoredModifier> aggregate_cluster(const ModifierCorpus& corpus, std::span<const EmbeddingVector> members,
                                              std::size_t top_n = kDefaultMenuSize);

struct ModifierMenu {
  std::string image_id;
  std::size_t cluster_id = 0;
  std::vector<ScoredModifier> image_modifiers;
  std::vector<ScoredModifier> cluster_modifiers;
  std::vector<ScoredModifier> cluster_unique_modifiers;
  std::string caption;
};

// Cluster-level lists for every cluster of a layout.
struct ClusterMenus {
  std::vector<std::vector<ScoredModifier>> aggregated;  // by cluster index
  std::vector<std::vector<ScoredModifier>> unique;
};

// embeddings[i] belongs to layout.image_ids[i].
ClusterMenus cluster_menus(const CanvasLayout& layout, std::span<const EmbeddingVector> embeddings,
                           const ModifierCorpus& corpus, std::size_t top_n = kDefaultMenuSize);

// Throws LookupError when image_id is not in the layout. The caption is
// read-only and left empty when png is empty.
ModifierMenu image_menu(const std::string& image_id, const CanvasLayout& layout,
                        std::span<const EmbeddingVector> embeddings, const ModifierCorpus& corpus,
                        const CaptionProvider& captioner, std::span<const std::uint8_t> png,
                        std::size_t top_n = kDefaultMenuSize);

nlohmann::json menu_to_json(const ModifierMenu& menu);

}  // namespace workbench
