#include "workbench/modifiers.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "workbench/errors.hpp"
#include "workbench/kernels.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace {

std::vector<std::size_t> unique_indices(const std::vector<ModifierEntry>& entries) {
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (seen.insert(to_lower(entries[i].phrase)).second) keep.push_back(i);
  }
  return keep;
}

void check_query(const ModifierCorpus& corpus, const EmbeddingVector& v) {
  if (v.modality != Modality::image) throw ContractViolation("modifier scoring needs an image embedding");
  if (!corpus.empty() && v.dimension() != corpus.dimension()) {
    throw ContractViolation("embedding dimension " + std::to_string(v.dimension()) +
                            " does not match modifier corpus dimension " + std::to_string(corpus.dimension()));
  }
}

nlohmann::json scored_to_json(const std::vector<ScoredModifier>& list) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : list) {
    out.push_back({{"phrase", m.phrase}, {"category", to_string(m.category)}, {"score", m.score}});
  }
  return out;
}

}  // namespace

std::string to_string(ModifierCategory c) { return c == ModifierCategory::artist ? "artist" : "phrase"; }

TsvModifiers read_modifier_tsv(std::istream& in) {
  TsvModifiers out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      ++out.malformed;
      continue;
    }
    const std::string phrase = trim(line.substr(0, tab));
    const std::string category = to_lower(trim(line.substr(tab + 1)));
    if (phrase.empty() || (category != "phrase" && category != "artist")) {
      ++out.malformed;
      continue;
    }
    out.entries.push_back({phrase, category == "artist" ? ModifierCategory::artist : ModifierCategory::phrase});
  }
  return out;
}

ModifierCorpus::ModifierCorpus(std::vector<ModifierEntry> entries, const EmbeddingProvider& provider)
    : dimension_(provider.dimension()), provider_id_(provider.id()) {
  for (std::size_t i : unique_indices(entries)) entries_.push_back(std::move(entries[i]));
  std::vector<std::string> phrases;
  phrases.reserve(entries_.size());
  for (const auto& e : entries_) phrases.push_back(e.phrase);
  const auto vectors = provider.embed_texts(phrases);
  matrix_.reserve(entries_.size() * dimension_);
  for (const auto& v : vectors) matrix_.insert(matrix_.end(), v.values.begin(), v.values.end());
}

ModifierCorpus::ModifierCorpus(std::vector<ModifierEntry> entries, std::span<const EmbeddingVector> embeddings) {
  if (entries.size() != embeddings.size()) throw ContractViolation("one embedding per modifier entry is required");
  for (std::size_t i : unique_indices(entries)) {
    const EmbeddingVector& v = embeddings[i];
    if (entries_.empty()) {
      dimension_ = v.dimension();
      provider_id_ = v.provider_id;
    } else if (v.dimension() != dimension_) {
      throw ContractViolation("modifier embeddings differ in dimension");
    }
    entries_.push_back(std::move(entries[i]));
    const auto u = unit(v.values);
    matrix_.insert(matrix_.end(), u.begin(), u.end());
  }
}

ModifierCorpus ModifierCorpus::load(const std::filesystem::path& tsv, const EmbeddingProvider& provider) {
  std::ifstream in(tsv);
  if (!in) throw InputError("cannot open modifier corpus " + tsv.string());
  return ModifierCorpus(read_modifier_tsv(in).entries, provider);
}

bool ModifierCorpus::contains(std::string_view phrase) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.phrase == phrase; });
}

std::vector<ScoredModifier> rank_scores(const ModifierCorpus& corpus, std::span<const double> scores,
                                        std::size_t top_n) {
  const auto& entries = corpus.entries();
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t k = std::min(top_n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto ka = similarity_rank_key(scores[a]), kb = similarity_rank_key(scores[b]);
                      if (ka != kb) return ka > kb;
                      return entries[a].phrase < entries[b].phrase;
                    });
  std::vector<ScoredModifier> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({entries[order[i]].phrase, entries[order[i]].category, scores[order[i]]});
  }
  return out;
}

std::vector<ScoredModifier> score_modifiers(const ModifierCorpus& corpus, const EmbeddingVector& image_embedding,
                                            std::size_t top_n) {
  check_query(corpus, image_embedding);
  if (top_n == 0 || corpus.empty()) return {};
  const auto q = unit(image_embedding.values);
  std::vector<double> scores(corpus.size());
  kernels::dot_scan(corpus.matrix(), corpus.dimension(), q, scores);
  for (double& s : scores) s = std::clamp(s, -1.0, 1.0);
  return rank_scores(corpus, scores, top_n);
}

std::vector<ScoredModifier> aggregate_cluster(const ModifierCorpus& corpus, std::span<const EmbeddingVector> members,
                                              std::size_t top_n) {
  if (members.empty()) throw ContractViolation("aggregate_cluster needs at least one member");
  for (const auto& m : members) check_query(corpus, m);
  if (top_n == 0 || corpus.empty()) return {};
  std::vector<double> total(corpus.size(), 0.0);
  std::vector<double> scores(corpus.size());
  for (const auto& m : members) {
    const auto q = unit(m.values);
    kernels::dot_scan(corpus.matrix(), corpus.dimension(), q, scores);
    for (std::size_t i = 0; i < scores.size(); ++i) total[i] += std::clamp(scores[i], -1.0, 1.0);
  }
  for (double& t : total) t /= static_cast<double>(members.size());
  return rank_scores(corpus, total, top_n);
}

ClusterMenus cluster_menus(const CanvasLayout& layout, std::span<const EmbeddingVector> embeddings,
                           const ModifierCorpus& corpus, std::size_t top_n) {
  if (embeddings.size() != layout.size()) throw ContractViolation("one embedding per layout image is required");
  ClusterMenus out;
  const std::size_t nc = layout.clusters.size();
  out.aggregated.resize(nc);
  out.unique.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<EmbeddingVector> members;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (layout.cluster_of[i] == c) members.push_back(embeddings[i]);
    }
    if (!members.empty()) out.aggregated[c] = aggregate_cluster(corpus, members, top_n);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    for (const auto& m : out.aggregated[c]) {
      bool elsewhere = false;
      for (std::size_t o = 0; o < nc && !elsewhere; ++o) {
        if (o == c) continue;
        elsewhere = std::any_of(out.aggregated[o].begin(), out.aggregated[o].end(),
                                [&](const auto& x) { return x.phrase == m.phrase; });
      }
      if (!elsewhere) out.unique[c].push_back(m);
    }
  }
  return out;
}

ModifierMenu image_menu(const std::string& image_id, const CanvasLayout& layout,
                        std::span<const EmbeddingVector> embeddings, const ModifierCorpus& corpus,
                        const CaptionProvider& captioner, std::span<const std::uint8_t> png, std::size_t top_n) {
  const auto index = layout.index_of(image_id);
  if (!index) throw LookupError("image " + image_id + " is not in the current layout");
  const ClusterMenus menus = cluster_menus(layout, embeddings, corpus, top_n);
  const std::size_t c = layout.cluster_of[*index];

  ModifierMenu menu;
  menu.image_id = image_id;
  menu.cluster_id = layout.clusters[c].id;
  menu.image_modifiers = score_modifiers(corpus, embeddings[*index], top_n);
  menu.cluster_modifiers = menus.aggregated[c];
  menu.cluster_unique_modifiers = menus.unique[c];
  menu.caption = png.empty() ? std::string() : captioner.caption(png);
  return menu;
}

nlohmann::json menu_to_json(const ModifierMenu& menu) {
  return {{"image_id", menu.image_id},
          {"cluster", menu.cluster_id},
          {"image_modifiers", scored_to_json(menu.image_modifiers)},
          {"cluster_modifiers", scored_to_json(menu.cluster_modifiers)},
          {"cluster_unique_modifiers", scored_to_json(menu.cluster_unique_modifiers)},
          {"caption", menu.caption}};
}

}  // namespace workbench
