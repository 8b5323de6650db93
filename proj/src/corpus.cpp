#include "workbench/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "workbench/errors.hpp"
#include "workbench/kernels.hpp"
#include "workbench/util.hpp"

namespace workbench {

static_assert(std::endian::native == std::endian::little,
              "vector sidecar is written in host byte order");

namespace {

constexpr std::size_t kEmbedBatch = 256;
constexpr char kVectorMagic[8] = {'W', 'B', 'V', 'E', 'C', '\0', '\0', '\1'};
constexpr std::string_view kCorpusFormat = "workbench-prompt-corpus";

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_extension(".vec");
  return p;
}

}  // namespace

std::vector<std::string> split_segments(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    std::string piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

PromptRecord PromptRecord::from_text(std::string id, std::string text, double nsfw_score) {
  PromptRecord r;
  r.id = std::move(id);
  r.segments = split_segments(text);
  r.text = std::move(text);
  r.nsfw_score = nsfw_score;
  return r;
}

bool passes_filter(const PromptRecord& record, const FilterConfig& filter) {
  return record.nsfw_score <= filter.nsfw_threshold && record.segments.size() >= filter.min_segments;
}

JsonlPrompts read_prompt_jsonl(std::istream& in) {
  JsonlPrompts out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("nsfw_score") ||
          !j["text"].is_string() || !j["nsfw_score"].is_number()) {
        ++out.malformed;
        continue;
      }
      // Ids may be numeric in community dumps.
      std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      out.records.push_back(PromptRecord::from_text(std::move(id), j["text"].get<std::string>(),
                                                    j["nsfw_score"].get<double>()));
    } catch (const nlohmann::json::exception&) {
      ++out.malformed;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

FilteredCorpus::FilteredCorpus(std::vector<PromptRecord> records, FilterConfig filter,
                               std::string provider_id, std::size_t dimension,
                               std::vector<double> matrix)
    : records_(std::move(records)),
      filter_(filter),
      provider_id_(std::move(provider_id)),
      dimension_(dimension),
      matrix_(std::move(matrix)) {
  if (matrix_.size() != records_.size() * dimension_) {
    throw ContractViolation("corpus matrix size does not match record count x dimension");
  }
  for (auto& r : records_) {
    if (!passes_filter(r, filter_)) throw ContractViolation("corpus record " + r.id + " fails filter");
    r.embedding.reset();
  }
}

EmbeddingVector FilteredCorpus::embedding_of(std::size_t index) const {
  const auto first = matrix_.begin() + static_cast<std::ptrdiff_t>(index * dimension_);
  return EmbeddingVector{std::vector<double>(first, first + static_cast<std::ptrdiff_t>(dimension_)),
                         Modality::text, provider_id_, true};
}

std::vector<PromptRecord> FilteredCorpus::records_with_embeddings() const {
  std::vector<PromptRecord> out = records_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].embedding = embedding_of(i);
  return out;
}

const PromptRecord* FilteredCorpus::find(std::string_view id) const {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<Neighbor> FilteredCorpus::knn(const EmbeddingVector& query, std::size_t k) const {
  if (k < 1) throw ContractViolation("knn: k must be at least 1");
  if (records_.empty()) return {};
  if (query.dimension() != dimension_) {
    throw ContractViolation("knn: query dimension " + std::to_string(query.dimension()) +
                            " does not match corpus dimension " + std::to_string(dimension_));
  }
  const std::vector<double> q = unit(query.values);
  std::vector<double> scores(records_.size());
  kernels::dot_scan(matrix_, dimension_, q, scores);

  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto ka = similarity_rank_key(scores[a]), kb = similarity_rank_key(scores[b]);
                      if (ka != kb) return ka > kb;
                      return records_[a].id < records_[b].id;
                    });
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({records_[order[i]].id, std::clamp(scores[order[i]], -1.0, 1.0)});
  }
  return out;
}

// ---------------------------------------------------------------------------

IngestReport ingest(std::span<const PromptRecord> records, const EmbeddingProvider& provider,
                    const FilterConfig& filter) {
  IngestReport report;
  report.input_count = records.size();

  std::vector<PromptRecord> survivors;
  for (const auto& r : records) {
    const bool well_formed = !r.id.empty() && !trim(r.text).empty() && std::isfinite(r.nsfw_score) &&
                             r.nsfw_score >= 0.0 && r.nsfw_score <= 1.0;
    if (!well_formed) {
      ++report.malformed;
      continue;
    }
    PromptRecord copy = r;
    copy.segments = split_segments(copy.text);
    if (passes_filter(copy, filter)) survivors.push_back(std::move(copy));
  }

  const std::size_t dim = provider.dimension();
  std::vector<double> matrix(survivors.size() * dim);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto& e = survivors[i].embedding;
    if (e && e->provider_id == provider.id() && e->dimension() == dim) {
      const std::vector<double> v = e->normalized ? e->values : unit(e->values);
      std::copy(v.begin(), v.end(), matrix.begin() + static_cast<std::ptrdiff_t>(i * dim));
    } else {
      pending.push_back(i);
    }
  }

  std::size_t embedded = survivors.size() - pending.size();
  for (std::size_t start = 0; start < pending.size(); start += kEmbedBatch) {
    const std::size_t end = std::min(pending.size(), start + kEmbedBatch);
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(survivors[pending[i]].text);
    std::vector<EmbeddingVector> vectors;
    try {
      vectors = provider.embed_texts(texts);
    } catch (const ProviderError& e) {
      throw IngestError(std::string("ingest aborted: ") + e.what(), embedded, survivors.size());
    }
    for (std::size_t i = start; i < end; ++i) {
      const auto& v = vectors[i - start].values;
      std::copy(v.begin(), v.end(), matrix.begin() + static_cast<std::ptrdiff_t>(pending[i] * dim));
    }
    embedded += end - start;
  }

  report.survivors = survivors.size();
  report.corpus = FilteredCorpus(std::move(survivors), filter, provider.id(), dim, std::move(matrix));
  return report;
}

// ---------------------------------------------------------------------------

void save_corpus(const FilteredCorpus& corpus, const std::filesystem::path& path) {
  const auto vec_path = sidecar_path(path);
  const auto matrix = corpus.matrix();

  std::string blob(kVectorMagic, sizeof kVectorMagic);
  const std::uint64_t dim = corpus.dimension();
  const std::uint64_t count = corpus.size();
  blob.append(reinterpret_cast<const char*>(&dim), sizeof dim);
  blob.append(reinterpret_cast<const char*>(&count), sizeof count);
  blob.append(reinterpret_cast<const char*>(matrix.data()), matrix.size_bytes());

  nlohmann::json header{
      {"format", kCorpusFormat},
      {"version", kCorpusFormatVersion},
      {"provider_id", corpus.provider_id()},
      {"dimension", corpus.dimension()},
      {"count", corpus.size()},
      {"filter",
       {{"nsfw_threshold", corpus.filter().nsfw_threshold},
        {"min_segments", corpus.filter().min_segments}}},
      {"vectors", vec_path.filename().string()},
      {"vectors_fnv1a", to_hex(fnv1a64(std::string_view(blob)))},
  };
  std::ostringstream out;
  out << header.dump() << '\n';
  for (const auto& r : corpus.records()) {
    out << nlohmann::json{{"id", r.id},
                          {"text", r.text},
                          {"nsfw_score", r.nsfw_score},
                          {"segments", r.segments}}
               .dump()
        << '\n';
  }
  write_file_atomic(vec_path, std::string_view(blob));
  write_file_atomic(path, out.str());
}

LoadedCorpus load_corpus(const std::filesystem::path& path, std::string_view expected_provider_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open corpus " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("corpus file is empty: " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corpus header is not JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kCorpusFormat) {
    throw FormatError("not a prompt corpus file: " + path.string());
  }
  const int version = header.value("version", -1);
  if (version != kCorpusFormatVersion) {
    throw VersionError("corpus format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCorpusFormatVersion) + ")");
  }

  std::size_t dim = 0;
  std::size_t count = 0;
  FilterConfig filter;
  std::string provider_id;
  std::string vec_name;
  std::string checksum;
  try {
    dim = header.at("dimension").get<std::size_t>();
    count = header.at("count").get<std::size_t>();
    filter.nsfw_threshold = header.at("filter").at("nsfw_threshold").get<double>();
    filter.min_segments = header.at("filter").at("min_segments").get<std::size_t>();
    provider_id = header.at("provider_id").get<std::string>();
    vec_name = header.at("vectors").get<std::string>();
    checksum = header.at("vectors_fnv1a").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corpus header incomplete: ") + e.what());
  }

  std::vector<PromptRecord> records;
  records.reserve(count);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PromptRecord r = PromptRecord::from_text(j.at("id").get<std::string>(),
                                               j.at("text").get<std::string>(),
                                               j.at("nsfw_score").get<double>());
      if (j.at("segments").get<std::vector<std::string>>() != r.segments) {
        throw FormatError("segments do not match text on line " + std::to_string(line_no));
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + " is malformed: " + e.what());
    }
  }
  if (records.size() != count) {
    throw FormatError("corpus truncated: header promises " + std::to_string(count) + " records, found " +
                      std::to_string(records.size()));
  }

  const auto vec_path = path.parent_path() / vec_name;
  std::vector<std::uint8_t> blob;
  try {
    blob = read_binary_file(vec_path);
  } catch (const InputError&) {
    throw FormatError("missing vector sidecar " + vec_path.string());
  }
  const std::size_t header_bytes = sizeof kVectorMagic + 2 * sizeof(std::uint64_t);
  if (blob.size() < header_bytes || std::memcmp(blob.data(), kVectorMagic, sizeof kVectorMagic) != 0) {
    throw FormatError("vector sidecar has a bad header");
  }
  std::uint64_t file_dim = 0;
  std::uint64_t file_count = 0;
  std::memcpy(&file_dim, blob.data() + sizeof kVectorMagic, sizeof file_dim);
  std::memcpy(&file_count, blob.data() + sizeof kVectorMagic + sizeof file_dim, sizeof file_count);
  if (file_dim != dim || file_count != count) {
    throw FormatError("vector sidecar shape does not match corpus header");
  }
  if (blob.size() != header_bytes + count * dim * sizeof(double)) {
    throw FormatError("vector sidecar truncated");
  }
  if (to_hex(fnv1a64(blob)) != checksum) throw FormatError("vector sidecar checksum mismatch");

  std::vector<double> matrix(count * dim);
  std::memcpy(matrix.data(), blob.data() + header_bytes, matrix.size() * sizeof(double));

  LoadedCorpus out;
  try {
    out.corpus = FilteredCorpus(std::move(records), filter, provider_id, dim, std::move(matrix));
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("corpus content inconsistent: ") + e.what());
  }
  if (!expected_provider_id.empty() && expected_provider_id != provider_id) {
    out.warnings.push_back("corpus was embedded with provider '" + provider_id +
                           "' but '" + std::string(expected_provider_id) + "' is configured");
  }
  return out;
}

}  // namespace workbench
