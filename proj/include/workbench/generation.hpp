#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "workbench/embedding.hpp"
#include "workbench/http_json.hpp"

namespace workbench {

inline constexpr int kMaxBatchSize = 100;

struct GenerationRequest {
  std::string prompt;
  std::string negative_prompt;
  std::optional<std::uint64_t> seed;  // empty: draw a fresh seed per image
  int steps = 50;
  double cfg_scale = 7.5;
  std::string sampler_id = "euler_a";
  int width = 512;
  int height = 512;
  int batch_size = 1;

  // Throws InputError on an empty prompt or out-of-range numbers.
  void validate() const;
  bool operator==(const GenerationRequest&) const = default;
};

nlohmann::json request_to_json(const GenerationRequest& r);
GenerationRequest request_from_json(const nlohmann::json& j);

struct GeneratedImage {
  std::string id;
  std::vector<std::uint8_t> png;  // empty when blocked, failed or missing
  std::string source_prompt_id;
  std::uint64_t seed = 0;
  std::optional<EmbeddingVector> embedding;
  bool blocked = false;
  bool failed = false;
  bool missing = false;  // pixels expected on disk but not found at load
  std::string error;
  std::string embed_error;

  bool has_pixels() const noexcept { return !png.empty(); }
  bool operator==(const GeneratedImage&) const = default;
};

class ImageBackend {
 public:
  virtual ~ImageBackend() = default;
  virtual std::string id() const = 0;
  // One PNG for the given seed. ProviderError with unreachable() set aborts
  // the batch; any other exception fails only this image.
  virtual std::vector<std::uint8_t> render(const GenerationRequest& request, std::uint64_t seed) const = 0;
};

// Seeded value noise tinted by the prompt hash. A pure function of
// (prompt, seed, width, height).
class MockImageBackend final : public ImageBackend {
 public:
  std::string id() const override { return "mock"; }
  std::vector<std::uint8_t> render(const GenerationRequest& request, std::uint64_t seed) const override;
};

// txt2img-style JSON endpoint: request carries every GenerationRequest field,
// reply is {"images": [base64 png], "seeds": [...]}.
class HttpImageBackend final : public ImageBackend {
 public:
  explicit HttpImageBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string id() const override { return "http:" + endpoint_.url; }
  std::vector<std::uint8_t> render(const GenerationRequest& request, std::uint64_t seed) const override;

 private:
  HttpEndpoint endpoint_;
};

// Returns true when the image must be withheld.
using SafetyFilter = std::function<bool(const std::string& prompt, std::span<const std::uint8_t> png)>;

// Blocks prompts containing any of the terms (case-insensitive).
SafetyFilter substring_filter(std::vector<std::string> terms);

struct BatchOptions {
  std::string source_prompt_id;
  std::string id_prefix = "img";
  std::size_t first_index = 1;  // ids are id_prefix + zero-padded index
  SafetyFilter safety;          // empty: no filtering
  std::size_t concurrency = 4;
  std::optional<std::uint64_t> random_seed_source;  // for reproducible "random" seeds in tests
};

std::string image_id(const std::string& prefix, std::size_t index);

// Exactly batch_size results in submission order.
std::vector<GeneratedImage> generate_batch(const ImageBackend& backend, const GenerationRequest& request,
                                           const BatchOptions& options = {});

struct EmbedReport {
  std::size_t embedded = 0;
  std::size_t skipped = 0;  // blocked, failed, missing or already embedded
  std::size_t failed = 0;
  std::size_t provider_calls = 0;
};

// Attaches image embeddings to every unblocked image that has pixels and no
// embedding from this provider yet. Failures are flagged per image.
EmbedReport embed_batch(const EmbeddingProvider& provider, std::span<GeneratedImage> images);

}  // namespace workbench
