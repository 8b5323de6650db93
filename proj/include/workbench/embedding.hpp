#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "workbench/http_json.hpp"

namespace workbench {

enum class Modality { text, image };

std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);

struct EmbeddingVector {
  std::vector<double> values;
  Modality modality = Modality::text;
  std::string provider_id;
  bool normalized = false;

  std::size_t dimension() const noexcept { return values.size(); }
  double norm() const;

  // Throws ContractViolation if a component is non-finite, D < 2, or a
  // vector flagged normalized is off the unit sphere by more than 1e-6.
  void validate() const;

  bool operator==(const EmbeddingVector&) const = default;
};

// dot(a,b) / (|a||b|), clamped to [-1, 1].
// Dimension mismatch -> ContractViolation; zero vector -> DomainError.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Scales to unit length in place and sets the flag. Zero vector -> DomainError.
void normalize(EmbeddingVector& v);
std::vector<double> unit(std::span<const double> values);

enum class ProviderKind { remote_http, deterministic_stub };

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual ProviderKind kind() const = 0;

  // Checks inputs then forwards to the batch hooks. Output is always
  // L2-normalized with the provider's id and dimension.
  EmbeddingVector embed_text(std::string_view text) const;
  EmbeddingVector embed_image(std::span<const std::uint8_t> png) const;
  std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts) const;
  std::vector<EmbeddingVector> embed_images(std::span<const std::vector<std::uint8_t>> images) const;

 protected:
  virtual std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) const = 0;
  virtual std::vector<std::vector<double>> raw_images(
      std::span<const std::vector<std::uint8_t>> images) const = 0;

 private:
  std::vector<EmbeddingVector> finish(std::vector<std::vector<double>> raw, std::size_t expected,
                                      Modality modality) const;
};

// Offline provider. Text: signed feature hashing of lower-cased word unigrams,
// word bigrams and boundary-marked character trigrams into `dimension` buckets.
// Image: signed hashing of quantized colors sampled on a fixed-stride grid.
class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 64;
  static constexpr int kPixelStride = 16;

  explicit StubEmbeddingProvider(std::size_t dimension = kDefaultDimension, std::uint64_t seed = 0);

  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  ProviderKind kind() const override { return ProviderKind::deterministic_stub; }

 protected:
  std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) const override;
  std::vector<std::vector<double>> raw_images(
      std::span<const std::vector<std::uint8_t>> images) const override;

 private:
  std::vector<double> hash_text(std::string_view text) const;
  std::vector<double> hash_image(std::span<const std::uint8_t> png) const;
  void scatter(std::vector<double>& out, std::string_view feature, double weight) const;

  std::size_t dimension_;
  std::uint64_t seed_;
};

// POSTs {"inputs": [...]} and expects {"vectors": [[...], ...]}. Images travel
// as base64 PNG strings with "modality": "image" alongside.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(HttpEndpoint endpoint, std::string id, std::size_t dimension);

  std::string id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  ProviderKind kind() const override { return ProviderKind::remote_http; }

 protected:
  std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) const override;
  std::vector<std::vector<double>> raw_images(
      std::span<const std::vector<std::uint8_t>> images) const override;

 private:
  std::vector<std::vector<double>> exchange(const nlohmann::json& body, std::size_t expected) const;

  HttpEndpoint endpoint_;
  std::string id_;
  std::size_t dimension_;
};

class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  virtual std::string id() const = 0;
  // Rejects undecodable payloads with InputError before calling out.
  std::string caption(std::span<const std::uint8_t> png) const;

 protected:
  virtual std::string raw_caption(std::span<const std::uint8_t> png) const = 0;
};

// "image " + first 8 hex digits of the FNV-1a hash of the payload.
class StubCaptionProvider final : public CaptionProvider {
 public:
  std::string id() const override { return "stub-caption"; }

 protected:
  std::string raw_caption(std::span<const std::uint8_t> png) const override;
};

// Same request shape as HttpEmbeddingProvider; response {"captions": ["..."]}.
class HttpCaptionProvider final : public CaptionProvider {
 public:
  explicit HttpCaptionProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string id() const override { return "http-caption:" + endpoint_.url; }

 protected:
  std::string raw_caption(std::span<const std::uint8_t> png) const override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace workbench
