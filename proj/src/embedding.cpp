#include "workbench/embedding.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "workbench/errors.hpp"
#include "workbench/image.hpp"
#include "workbench/util.hpp"

namespace workbench {

std::string_view to_string(Modality m) { return m == Modality::text ? "text" : "image"; }

Modality modality_from_string(std::string_view s) {
  if (s == "text") return Modality::text;
  if (s == "image") return Modality::image;
  throw FormatError("unknown modality: " + std::string(s));
}

double EmbeddingVector::norm() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

void EmbeddingVector::validate() const {
  if (values.size() < 2) throw ContractViolation("embedding dimension must be at least 2");
  for (double v : values) {
    if (!std::isfinite(v)) throw ContractViolation("embedding has a non-finite component");
  }
  if (normalized && std::abs(norm() - 1.0) > 1e-6) {
    throw ContractViolation("embedding flagged normalized is not unit length");
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_similarity: zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

std::vector<double> unit(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  if (acc == 0.0) throw DomainError("cannot normalize a zero vector");
  const double n = std::sqrt(acc);
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v /= n;
  return out;
}

void normalize(EmbeddingVector& v) {
  v.values = unit(v.values);
  v.normalized = true;
}

// ---------------------------------------------------------------------------

EmbeddingVector EmbeddingProvider::embed_text(std::string_view text) const {
  std::string s(text);
  return std::move(embed_texts(std::span<const std::string>(&s, 1)).front());
}

EmbeddingVector EmbeddingProvider::embed_image(std::span<const std::uint8_t> png) const {
  std::vector<std::vector<std::uint8_t>> one{{png.begin(), png.end()}};
  return std::move(embed_images(one).front());
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_texts(std::span<const std::string> texts) const {
  for (const auto& t : texts) {
    if (trim(t).empty()) throw InputError("cannot embed empty text");
  }
  if (texts.empty()) return {};
  return finish(raw_texts(texts), texts.size(), Modality::text);
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_images(
    std::span<const std::vector<std::uint8_t>> images) const {
  for (const auto& img : images) {
    if (!is_decodable_png(img)) throw InputError("cannot embed undecodable image payload");
  }
  if (images.empty()) return {};
  return finish(raw_images(images), images.size(), Modality::image);
}

std::vector<EmbeddingVector> EmbeddingProvider::finish(std::vector<std::vector<double>> raw,
                                                       std::size_t expected,
                                                       Modality modality) const {
  if (raw.size() != expected) {
    throw ProviderError(id() + " returned " + std::to_string(raw.size()) + " vectors for " +
                        std::to_string(expected) + " inputs");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (auto& values : raw) {
    if (values.size() != dimension()) {
      throw ProviderError(id() + " returned dimension " + std::to_string(values.size()) +
                          ", expected " + std::to_string(dimension()));
    }
    EmbeddingVector v{std::move(values), modality, id(), false};
    for (double x : v.values) {
      if (!std::isfinite(x)) throw ProviderError(id() + " returned a non-finite component");
    }
    if (v.norm() == 0.0) throw ProviderError(id() + " returned a zero vector");
    normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------

StubEmbeddingProvider::StubEmbeddingProvider(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ < 2) throw ContractViolation("stub embedding dimension must be at least 2");
}

std::string StubEmbeddingProvider::id() const {
  return "stub-" + std::to_string(dimension_) + "-" + std::to_string(seed_);
}

void StubEmbeddingProvider::scatter(std::vector<double>& out, std::string_view feature,
                                    double weight) const {
  const std::uint64_t h = fnv1a64(feature, seed_);
  const std::size_t bucket = static_cast<std::size_t>(h % dimension_);
  const double sign = ((mix64(h) >> 63) & 1) ? -1.0 : 1.0;
  out[bucket] += sign * weight;
}

std::vector<double> StubEmbeddingProvider::hash_text(std::string_view text) const {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  std::vector<double> out(dimension_, 0.0);
  if (words.empty()) {
    scatter(out, "raw:" + std::string(text), 1.0);
    return out;
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    scatter(out, "w:" + words[i], 1.0);
    if (i + 1 < words.size()) scatter(out, "b:" + words[i] + " " + words[i + 1], 1.0);
    const std::string marked = "<" + words[i] + ">";
    for (std::size_t k = 0; k + 3 <= marked.size(); ++k) {
      scatter(out, "t:" + marked.substr(k, 3), 0.5);
    }
  }
  return out;
}

std::vector<double> StubEmbeddingProvider::hash_image(std::span<const std::uint8_t> png) const {
  const Image img = decode_png(png);
  std::vector<double> out(dimension_, 0.0);
  const int region_w = std::max(1, img.width / 4);
  const int region_h = std::max(1, img.height / 4);
  for (int y = kPixelStride / 2; y < img.height; y += kPixelStride) {
    for (int x = kPixelStride / 2; x < img.width; x += kPixelStride) {
      const auto* p = img.pixel(x, y);
      const int bin = (p[0] >> 6) * 16 + (p[1] >> 6) * 4 + (p[2] >> 6);
      scatter(out, "c:" + std::to_string(bin), 1.0);
      scatter(out,
              "r:" + std::to_string(x / region_w) + "," + std::to_string(y / region_h) + ":" +
                  std::to_string(bin),
              0.5);
    }
  }
  // Images smaller than the stride still get a deterministic signature.
  if (std::all_of(out.begin(), out.end(), [](double v) { return v == 0.0; })) {
    scatter(out, "bytes:" + to_hex(fnv1a64(png)), 1.0);
  }
  return out;
}

std::vector<std::vector<double>> StubEmbeddingProvider::raw_texts(
    std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out(texts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(texts.size()); ++i) {
    out[static_cast<std::size_t>(i)] = hash_text(texts[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<std::vector<double>> StubEmbeddingProvider::raw_images(
    std::span<const std::vector<std::uint8_t>> images) const {
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(hash_image(img));
  return out;
}

// ---------------------------------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEndpoint endpoint, std::string id,
                                             std::size_t dimension)
    : endpoint_(std::move(endpoint)), id_(std::move(id)), dimension_(dimension) {
  if (dimension_ < 2) throw ContractViolation("embedding dimension must be at least 2");
}

std::vector<std::vector<double>> HttpEmbeddingProvider::exchange(const nlohmann::json& body,
                                                                 std::size_t expected) const {
  const nlohmann::json reply = post_json(endpoint_, body);
  if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
    throw ProviderError(id_ + ": response has no \"vectors\" array");
  }
  std::vector<std::vector<double>> out;
  try {
    out = reply["vectors"].get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(id_ + ": malformed vectors: " + e.what());
  }
  if (out.size() != expected) {
    throw ProviderError(id_ + ": expected " + std::to_string(expected) + " vectors, got " +
                        std::to_string(out.size()));
  }
  return out;
}

std::vector<std::vector<double>> HttpEmbeddingProvider::raw_texts(
    std::span<const std::string> texts) const {
  nlohmann::json body{{"inputs", std::vector<std::string>(texts.begin(), texts.end())}};
  return exchange(body, texts.size());
}

std::vector<std::vector<double>> HttpEmbeddingProvider::raw_images(
    std::span<const std::vector<std::uint8_t>> images) const {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& img : images) inputs.push_back(base64_encode(img));
  return exchange({{"inputs", inputs}, {"modality", "image"}}, images.size());
}

// ---------------------------------------------------------------------------

std::string CaptionProvider::caption(std::span<const std::uint8_t> png) const {
  if (!is_decodable_png(png)) throw InputError("cannot caption undecodable image payload");
  std::string text = trim(raw_caption(png));
  if (text.empty()) throw ProviderError(id() + " returned an empty caption");
  return text;
}

std::string StubCaptionProvider::raw_caption(std::span<const std::uint8_t> png) const {
  return "image " + to_hex(fnv1a64(png)).substr(0, 8);
}

std::string HttpCaptionProvider::raw_caption(std::span<const std::uint8_t> png) const {
  const nlohmann::json reply =
      post_json(endpoint_, {{"inputs", nlohmann::json::array({base64_encode(png)})}});
  if (!reply.contains("captions") || !reply["captions"].is_array() || reply["captions"].empty() ||
      !reply["captions"][0].is_string()) {
    throw ProviderError("caption endpoint response has no \"captions\" strings");
  }
  return reply["captions"][0].get<std::string>();
}

}  // namespace workbench
