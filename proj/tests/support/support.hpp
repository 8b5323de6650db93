#pragma once

// Shared test helpers and independent oracles. Oracles here deliberately
// avoid the library's fast paths (kernels, partial sorts) so that agreement
// means something.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "workbench/chat.hpp"
#include "workbench/corpus.hpp"
#include "workbench/embedding.hpp"
#include "workbench/tsne.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

fs::path source_dir();
fs::path fixture_path(const std::string& name);

// Answers through a callback and counts calls.
class ScriptedChatProvider final : public workbench::ChatProvider {
 public:
  using Script = std::function<std::string(const workbench::ChatRequest&)>;
  explicit ScriptedChatProvider(Script script, std::string model = "scripted")
      : script_(std::move(script)), model_(std::move(model)) {}
  workbench::ChatProviderKind kind() const override { return workbench::ChatProviderKind::offline_mock; }
  std::string model_id() const override { return model_; }
  std::string complete(const workbench::ChatRequest& request) const override {
    ++calls_;
    return script_(request);
  }
  int calls() const { return calls_; }

 private:
  Script script_;
  std::string model_;
  mutable std::atomic<int> calls_{0};
};

// Delegates to a stub and counts batch calls.
class CountingEmbeddingProvider final : public workbench::EmbeddingProvider {
 public:
  explicit CountingEmbeddingProvider(std::size_t dim = 64) : inner_(dim) {}
  std::string id() const override { return inner_.id(); }
  std::size_t dimension() const override { return inner_.dimension(); }
  workbench::ProviderKind kind() const override { return inner_.kind(); }
  int calls() const { return calls_; }
  void fail_on_image_bytes(std::size_t size) { poison_size_ = size; }

 protected:
  std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) const override;
  std::vector<std::vector<double>> raw_images(std::span<const std::vector<std::uint8_t>> images) const override;

 private:
  workbench::StubEmbeddingProvider inner_;
  mutable std::atomic<int> calls_{0};
  std::size_t poison_size_ = 0;
};

// A local HTTP server on an ephemeral port, stopped on destruction.
class FixtureServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;
  FixtureServer();
  ~FixtureServer();
  void post(const std::string& pattern, Handler handler);
  void get(const std::string& pattern, Handler handler);
  httplib::Server& raw();
  void start();
  int port() const { return port_; }
  std::string url(const std::string& path) const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// A port nothing listens on.
int closed_port();

workbench::EmbeddingVector vec(std::vector<double> values, workbench::Modality m = workbench::Modality::image,
                               std::string provider = "test");

// ---------------------------------------------------------------------------
// Worked examples.

extern const char* const kLionSuggestion;
extern const char* const kJapanSuggestion;
extern const char* const kIdeationResponse;
extern const char* const kSteerResponse;
extern const char* const kGhibliCompletion;
extern const std::vector<std::string> kGhibliModifiers;
extern const char* const kCowPrompt;
extern const char* const kCowModifier;
extern const char* const kCowIntegrated;
extern const char* const kSteerInstruction;
extern const char* const kTwoItemSubject;
extern const char* const kTwoItemResponse;

// The scripted answers the worked-example fixture was recorded from.
ScriptedChatProvider::Script worked_script();

// Sample corpus embedded with the default stub, default filter.
const workbench::FilteredCorpus& sample_corpus();

// ---------------------------------------------------------------------------
// Oracles.

// Straight re-implementation of the ingest filter on raw JSONL lines: keep
// nsfw <= threshold and at least min_segments non-empty comma segments.
std::vector<std::string> oracle_filter_ids(const std::vector<std::string>& jsonl_lines, double threshold,
                                           std::size_t min_segments);

struct OracleHit {
  std::string id;
  double score;
};
// Full sort of cosine similarity over every record; scores equal to 12
// decimals tie and fall back to id order.
std::vector<OracleHit> oracle_knn(const std::vector<std::string>& ids,
                                  const std::vector<workbench::EmbeddingVector>& vectors,
                                  const workbench::EmbeddingVector& query, std::size_t k);

struct ExhaustiveClustering {
  double best_net = 0.0;
  std::vector<std::size_t> best_exemplar_of;  // per point
};
// Every non-empty exemplar subset; points join their most similar exemplar.
ExhaustiveClustering exhaustive_exemplars(const std::vector<double>& s, std::size_t n, double preference);

// Canonical partition: label each point by the smallest index in its group.
std::vector<std::size_t> canonical_partition(const std::vector<std::size_t>& group_of);

// Fraction of points whose nearest 2-D neighbour carries the same label.
double neighbor_preservation(const std::vector<workbench::Point2>& points, const std::vector<int>& labels);

struct OracleScore {
  std::string phrase;
  double score;
};
// Mean cosine over members, full sort; 12-decimal ties by phrase.
std::vector<OracleScore> oracle_mean_rank(const std::vector<std::string>& phrases,
                                          const std::vector<workbench::EmbeddingVector>& phrase_vectors,
                                          const std::vector<workbench::EmbeddingVector>& members, std::size_t top_n);

// Gaussian blobs in `dim` dimensions. Returns rows and labels.
struct Blobs {
  std::vector<workbench::EmbeddingVector> vectors;
  std::vector<int> labels;
};
Blobs gaussian_blobs(std::size_t blobs, std::size_t per_blob, std::size_t dim, double spread, double separation,
                     std::uint64_t seed);

}  // namespace testsupport
