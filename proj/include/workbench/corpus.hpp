#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "workbench/embedding.hpp"

namespace workbench {

// Comma split, whitespace trimmed, empty phrases dropped, order kept.
std::vector<std::string> split_segments(std::string_view text);

struct PromptRecord {
  std::string id;
  std::string text;
  std::vector<std::string> segments;
  double nsfw_score = 0.0;
  std::optional<EmbeddingVector> embedding;

  static PromptRecord from_text(std::string id, std::string text, double nsfw_score);
  bool operator==(const PromptRecord&) const = default;
};

struct FilterConfig {
  double nsfw_threshold = 0.1;  // scores strictly above are dropped
  std::size_t min_segments = 6; // counts every comma segment, subject included

  bool operator==(const FilterConfig&) const = default;
};

bool passes_filter(const PromptRecord& record, const FilterConfig& filter);

struct JsonlPrompts {
  std::vector<PromptRecord> records;
  std::size_t malformed = 0;
};

// One {"id","text","nsfw_score"} object per line. Blank lines are ignored;
// lines that do not parse, or lack a field, count as malformed.
JsonlPrompts read_prompt_jsonl(std::istream& in);

struct Neighbor {
  std::string id;
  double similarity = 0.0;
  bool operator==(const Neighbor&) const = default;
};

// Immutable after construction. Embeddings live in one row-major matrix so
// the similarity scan is a single contiguous pass.
class FilteredCorpus {
 public:
  FilteredCorpus() = default;
  FilteredCorpus(std::vector<PromptRecord> records, FilterConfig filter, std::string provider_id,
                 std::size_t dimension, std::vector<double> matrix);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& provider_id() const noexcept { return provider_id_; }
  const FilterConfig& filter() const noexcept { return filter_; }

  // Records without their embedding; see embedding_of().
  const std::vector<PromptRecord>& records() const noexcept { return records_; }
  std::span<const double> matrix() const noexcept { return matrix_; }
  EmbeddingVector embedding_of(std::size_t index) const;
  // Records with embeddings attached, as fed to ingest().
  std::vector<PromptRecord> records_with_embeddings() const;
  const PromptRecord* find(std::string_view id) const;

  // min(k, size()) results by descending cosine similarity, ties by ascending id.
  std::vector<Neighbor> knn(const EmbeddingVector& query, std::size_t k = 10) const;

  bool operator==(const FilteredCorpus&) const = default;

 private:
  std::vector<PromptRecord> records_;
  FilterConfig filter_;
  std::string provider_id_;
  std::size_t dimension_ = 0;
  std::vector<double> matrix_;
};

struct IngestReport {
  FilteredCorpus corpus;
  std::size_t input_count = 0;
  std::size_t survivors = 0;
  std::size_t malformed = 0;  // skipped: missing id/text or nsfw outside [0,1]
};

// Filters, then embeds every survivor. Records that already carry an
// embedding from the same provider are not re-embedded. A provider failure
// throws IngestError with the number embedded so far.
IngestReport ingest(std::span<const PromptRecord> records, const EmbeddingProvider& provider,
                    const FilterConfig& filter = {});

struct LoadedCorpus {
  FilteredCorpus corpus;
  std::vector<std::string> warnings;
};

inline constexpr int kCorpusFormatVersion = 1;

// Writes `path` (JSON lines: header then one record per line) and a binary
// vector sidecar next to it with extension ".vec".
void save_corpus(const FilteredCorpus& corpus, const std::filesystem::path& path);
// FormatError on any truncation or inconsistency, VersionError on a version
// mismatch. A provider id differing from `expected_provider_id` (when given)
// produces a warning, not an error.
LoadedCorpus load_corpus(const std::filesystem::path& path,
                         std::string_view expected_provider_id = {});

}  // namespace workbench
