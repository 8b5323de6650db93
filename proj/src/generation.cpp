#include "workbench/generation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <set>

#include "workbench/errors.hpp"
#include "workbench/image.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace {

constexpr int kNoiseCells = 8;
constexpr int kMaxSide = 4096;

struct Rgb {
  double r, g, b;
};

Rgb hsv(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 360.0) / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  Rgb out{0, 0, 0};
  switch (static_cast<int>(hp)) {
    case 0: out = {c, x, 0}; break;
    case 1: out = {x, c, 0}; break;
    case 2: out = {0, c, x}; break;
    case 3: out = {0, x, c}; break;
    case 4: out = {x, 0, c}; break;
    default: out = {c, 0, x}; break;
  }
  const double m = v - c;
  return {out.r + m, out.g + m, out.b + m};
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)); }

}  // namespace

void GenerationRequest::validate() const {
  if (trim(prompt).empty()) throw InputError("prompt is empty");
  if (steps <= 0) throw InputError("steps must be positive");
  if (!(cfg_scale > 0.0) || !std::isfinite(cfg_scale)) throw InputError("cfg_scale must be positive");
  if (sampler_id.empty()) throw InputError("sampler_id is empty");
  if (width <= 0 || height <= 0 || width > kMaxSide || height > kMaxSide) {
    throw InputError("width and height must be in [1, 4096]");
  }
  if (batch_size < 1 || batch_size > kMaxBatchSize) throw InputError("batch_size must be in [1, 100]");
}

nlohmann::json request_to_json(const GenerationRequest& r) {
  nlohmann::json j{{"prompt", r.prompt},   {"negative_prompt", r.negative_prompt},
                   {"steps", r.steps},     {"cfg_scale", r.cfg_scale},
                   {"sampler_id", r.sampler_id}, {"width", r.width},
                   {"height", r.height},   {"batch_size", r.batch_size}};
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  return j;
}

GenerationRequest request_from_json(const nlohmann::json& j) {
  GenerationRequest r;
  try {
    r.prompt = j.at("prompt").get<std::string>();
    r.negative_prompt = j.value("negative_prompt", "");
    if (j.contains("seed") && !j.at("seed").is_null()) {
      const auto& s = j.at("seed");
      if (!(s.is_number_integer() && s.get<std::int64_t>() < 0)) r.seed = s.get<std::uint64_t>();
    }
    r.steps = j.value("steps", r.steps);
    r.cfg_scale = j.value("cfg_scale", r.cfg_scale);
    r.sampler_id = j.value("sampler_id", j.value("sampler_name", r.sampler_id));
    r.width = j.value("width", r.width);
    r.height = j.value("height", r.height);
    r.batch_size = j.value("batch_size", r.batch_size);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad generation request: ") + e.what());
  }
  return r;
}

std::vector<std::uint8_t> MockImageBackend::render(const GenerationRequest& request, std::uint64_t seed) const {
  const std::uint64_t prompt_hash = fnv1a64(request.prompt);
  SplitMix64 rng(mix64(prompt_hash ^ mix64(seed)));
  constexpr int g = kNoiseCells + 1;
  std::vector<double> grid(g * g);
  for (double& v : grid) v = rng.uniform();

  const Rgb tint = hsv(static_cast<double>(prompt_hash % 360), 0.7, 0.95);
  const Rgb accent = hsv(static_cast<double>((prompt_hash >> 16) % 360), 0.5, 0.8);

  Image img{request.width, request.height, std::vector<std::uint8_t>(std::size_t(request.width) * request.height * 3)};
  for (int y = 0; y < img.height; ++y) {
    const double gy = static_cast<double>(y) / img.height * kNoiseCells;
    const int y0 = static_cast<int>(gy);
    const double ty = smooth(gy - y0);
    for (int x = 0; x < img.width; ++x) {
      const double gx = static_cast<double>(x) / img.width * kNoiseCells;
      const int x0 = static_cast<int>(gx);
      const double tx = smooth(gx - x0);
      const double top = grid[y0 * g + x0] * (1 - tx) + grid[y0 * g + x0 + 1] * tx;
      const double bottom = grid[(y0 + 1) * g + x0] * (1 - tx) + grid[(y0 + 1) * g + x0 + 1] * tx;
      const double v = top * (1 - ty) + bottom * ty;
      const double w = 0.35 + 0.65 * v;
      const double mix = v > 0.8 ? (v - 0.8) * 5.0 : 0.0;
      std::uint8_t* p = img.pixel(x, y);
      p[0] = to_byte((tint.r * (1 - mix) + accent.r * mix) * w);
      p[1] = to_byte((tint.g * (1 - mix) + accent.g * mix) * w);
      p[2] = to_byte((tint.b * (1 - mix) + accent.b * mix) * w);
    }
  }
  return encode_png(img);
}

std::vector<std::uint8_t> HttpImageBackend::render(const GenerationRequest& request, std::uint64_t seed) const {
  const nlohmann::json body{{"prompt", request.prompt},
                            {"negative_prompt", request.negative_prompt},
                            {"seed", seed},
                            {"steps", request.steps},
                            {"cfg_scale", request.cfg_scale},
                            {"sampler_name", request.sampler_id},
                            {"width", request.width},
                            {"height", request.height},
                            {"batch_size", 1}};
  const nlohmann::json reply = post_json(endpoint_, body);
  std::vector<std::uint8_t> png;
  try {
    png = base64_decode(reply.at("images").at(0).get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("image backend reply lacks images[0]: ") + e.what());
  }
  if (!is_decodable_png(png)) throw ProviderError("image backend returned bytes that are not a PNG");
  return png;
}

SafetyFilter substring_filter(std::vector<std::string> terms) {
  return [terms = std::move(terms)](const std::string& prompt, std::span<const std::uint8_t>) {
    return std::any_of(terms.begin(), terms.end(), [&](const auto& t) { return icontains(prompt, t); });
  };
}

std::string image_id(const std::string& prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return prefix + buf;
}

std::vector<GeneratedImage> generate_batch(const ImageBackend& backend, const GenerationRequest& request,
                                           const BatchOptions& options) {
  request.validate();
  const auto n = static_cast<std::size_t>(request.batch_size);

  std::vector<std::uint64_t> seeds(n);
  if (request.seed) {
    for (std::size_t k = 0; k < n; ++k) seeds[k] = *request.seed + k;
  } else {
    SplitMix64 rng(options.random_seed_source.value_or((std::uint64_t{std::random_device{}()} << 32) ^
                                                       std::random_device{}()));
    std::set<std::uint64_t> used;
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t s;
      do {
        s = rng.next() & 0xffffffffULL;
      } while (!used.insert(s).second);
      seeds[k] = s;
    }
  }

  std::vector<GeneratedImage> out(n);
  bool unreachable = false;
  std::string unreachable_message;
  const std::size_t window = std::max<std::size_t>(1, options.concurrency);
  for (std::size_t start = 0; start < n; start += window) {
    const std::size_t end = std::min(n, start + window);
    std::vector<std::future<std::vector<std::uint8_t>>> jobs;
    for (std::size_t k = start; k < end; ++k) {
      jobs.push_back(std::async(std::launch::async, [&backend, &request, seed = seeds[k]] {
        return backend.render(request, seed);
      }));
    }
    for (std::size_t k = start; k < end; ++k) {
      GeneratedImage& img = out[k];
      img.id = image_id(options.id_prefix, options.first_index + k);
      img.source_prompt_id = options.source_prompt_id;
      img.seed = seeds[k];
      try {
        img.png = jobs[k - start].get();
      } catch (const ProviderError& e) {
        img.failed = true;
        img.error = e.what();
        if (e.unreachable()) {
          unreachable = true;
          unreachable_message = e.what();
        }
      } catch (const std::exception& e) {
        img.failed = true;
        img.error = e.what();
      }
      if (!img.failed && options.safety && options.safety(request.prompt, img.png)) {
        img.blocked = true;
        img.png.clear();
      }
    }
    if (unreachable) break;
  }
  if (unreachable) throw GenerationError("image backend unreachable: " + unreachable_message);
  return out;
}

EmbedReport embed_batch(const EmbeddingProvider& provider, std::span<GeneratedImage> images) {
  EmbedReport report;
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const GeneratedImage& img = images[i];
    const bool current = img.embedding && img.embedding->provider_id == provider.id();
    if (img.blocked || img.failed || img.missing || !img.has_pixels() || current) {
      ++report.skipped;
      continue;
    }
    todo.push_back(i);
  }
  if (todo.empty()) return report;

  std::vector<std::vector<std::uint8_t>> payload;
  payload.reserve(todo.size());
  for (std::size_t i : todo) payload.push_back(images[i].png);
  try {
    ++report.provider_calls;
    auto vectors = provider.embed_images(payload);
    for (std::size_t k = 0; k < todo.size(); ++k) {
      images[todo[k]].embedding = std::move(vectors[k]);
      images[todo[k]].embed_error.clear();
    }
    report.embedded = todo.size();
    return report;
  } catch (const std::exception&) {
    // Retry one by one so a single bad image does not sink the batch.
  }
  for (std::size_t i : todo) {
    try {
      ++report.provider_calls;
      images[i].embedding = provider.embed_image(images[i].png);
      images[i].embed_error.clear();
      ++report.embedded;
    } catch (const std::exception& e) {
      images[i].embed_error = e.what();
      ++report.failed;
    }
  }
  return report;
}

}  // namespace workbench
