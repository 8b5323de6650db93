#include "workbench/config.hpp"

#include <fstream>
#include <iostream>

#include "workbench/errors.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ProviderSpec spec_from_json(const json& j, const ProviderSpec& fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_object() || !j.contains("kind")) throw InputError("provider block needs a \"kind\"");
  return {j.at("kind").get<std::string>(), j};
}

fs::path path_or(const json& j, const char* key, const fs::path& fallback) {
  return j.contains(key) && j.at(key).is_string() ? fs::path(j.at(key).get<std::string>()) : fallback;
}

std::size_t dimension_of(const ProviderSpec& spec, std::size_t fallback) {
  return spec.settings.value("dimension", fallback);
}

}  // namespace

Config Config::defaults() {
  Config c;
  const fs::path data = default_data_dir();
  c.templates_dir = data / "templates";
  c.modifiers_tsv = data / "modifiers.tsv";
  if (fs::exists(data / "prompts_sample.jsonl")) c.prompts_jsonl = data / "prompts_sample.jsonl";
  return c;
}

Config Config::from_json(const json& j) {
  Config c = defaults();
  try {
    c.embedding = spec_from_json(j.value("embedding", json()), c.embedding);
    c.caption = spec_from_json(j.value("caption", json()), c.caption);
    c.chat = spec_from_json(j.value("chat", json()), c.chat);
    c.image_backend = spec_from_json(j.value("image_backend", json()), c.image_backend);

    c.templates_dir = path_or(j, "templates_dir", c.templates_dir);
    c.corpus = path_or(j, "corpus", c.corpus);
    c.prompts_jsonl = path_or(j, "prompts_jsonl", c.prompts_jsonl);
    c.modifiers_tsv = path_or(j, "modifiers_tsv", c.modifiers_tsv);
    c.session_store = path_or(j, "session_store", c.session_store);
    c.record_chat = path_or(j, "record_chat", c.record_chat);

    if (j.contains("filter")) {
      c.filter.nsfw_threshold = j["filter"].value("nsfw_threshold", c.filter.nsfw_threshold);
      c.filter.min_segments = j["filter"].value("min_segments", c.filter.min_segments);
    }
    if (j.contains("engine")) {
      const auto& e = j["engine"];
      c.engine.ideation_temperature = e.value("ideation_temperature", c.engine.ideation_temperature);
      c.engine.style_temperature = e.value("style_temperature", c.engine.style_temperature);
      c.engine.integration_temperature = e.value("integration_temperature", c.engine.integration_temperature);
      c.engine.min_modifiers = e.value("min_modifiers", c.engine.min_modifiers);
      c.engine.style_examples = e.value("style_examples", c.engine.style_examples);
    }
    if (j.contains("generation")) {
      json g = j["generation"];
      if (!g.contains("prompt")) g["prompt"] = "unused";
      const auto defaults = request_from_json(g);
      c.generation_defaults = defaults;
      c.generation_defaults.prompt.clear();
    }
    c.safety_terms = j.value("safety_terms", c.safety_terms);
    c.menu_size = j.value("menu_size", c.menu_size);
    c.generation_concurrency = j.value("generation_concurrency", c.generation_concurrency);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad config: ") + e.what());
  }
  return c;
}

Config Config::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + " is not JSON: " + e.what());
  }
  Config c = from_json(j);
  const fs::path base = path.parent_path();
  for (fs::path* p : {&c.templates_dir, &c.corpus, &c.prompts_jsonl, &c.modifiers_tsv, &c.session_store,
                      &c.record_chat}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

HttpEndpoint endpoint_from_json(const json& s) {
  HttpEndpoint e;
  if (!s.contains("url")) throw InputError("remote provider needs a \"url\"");
  e.url = s.at("url").get<std::string>();
  e.token_env = s.value("token_env", "");
  e.timeout = std::chrono::milliseconds(s.value("timeout_ms", 60000));
  e.retries = s.value("retries", 2);
  e.backoff = std::chrono::milliseconds(s.value("backoff_ms", 250));
  return e;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderSpec& spec) {
  if (spec.kind == "stub") {
    return std::make_unique<StubEmbeddingProvider>(dimension_of(spec, StubEmbeddingProvider::kDefaultDimension),
                                                   spec.settings.value("seed", std::uint64_t{0}));
  }
  if (spec.kind == "http") {
    if (!spec.settings.contains("dimension")) throw InputError("http embedding provider needs a \"dimension\"");
    return std::make_unique<HttpEmbeddingProvider>(endpoint_from_json(spec.settings),
                                                   spec.settings.value("id", "http-embedding"),
                                                   dimension_of(spec, 0));
  }
  throw InputError("unknown embedding provider kind '" + spec.kind + "'");
}

std::unique_ptr<CaptionProvider> make_caption_provider(const ProviderSpec& spec) {
  if (spec.kind == "stub") return std::make_unique<StubCaptionProvider>();
  if (spec.kind == "http") return std::make_unique<HttpCaptionProvider>(endpoint_from_json(spec.settings));
  throw InputError("unknown caption provider kind '" + spec.kind + "'");
}

std::unique_ptr<ChatProvider> make_chat_provider(const ProviderSpec& spec) {
  if (spec.kind == "mock") return std::make_unique<MockChatProvider>();
  if (spec.kind == "fixture") {
    if (!spec.settings.contains("path")) throw InputError("fixture chat provider needs a \"path\"");
    return std::make_unique<FixtureChatProvider>(FixtureChatProvider::load(spec.settings.at("path").get<std::string>()));
  }
  if (spec.kind == "http") {
    return std::make_unique<HttpChatProvider>(endpoint_from_json(spec.settings),
                                              spec.settings.value("model", "gpt-3.5-turbo"));
  }
  throw InputError("unknown chat provider kind '" + spec.kind + "'");
}

std::unique_ptr<ImageBackend> make_image_backend(const ProviderSpec& spec) {
  if (spec.kind == "mock") return std::make_unique<MockImageBackend>();
  if (spec.kind == "http") return std::make_unique<HttpImageBackend>(endpoint_from_json(spec.settings));
  throw InputError("unknown image backend kind '" + spec.kind + "'");
}

std::unique_ptr<Providers> Providers::build(const Config& config) {
  auto p = std::make_unique<Providers>();
  p->embedder = make_embedding_provider(config.embedding);
  p->captioner = make_caption_provider(config.caption);
  p->chat_inner = make_chat_provider(config.chat);
  if (!config.record_chat.empty()) p->recorder = std::make_unique<RecordingChatProvider>(*p->chat_inner);
  p->backend = make_image_backend(config.image_backend);
  p->templates = PromptTemplates::load(config.templates_dir);

  if (!config.corpus.empty()) {
    auto loaded = load_corpus(config.corpus, p->embedder->id());
    for (const auto& w : loaded.warnings) std::clog << "warning: " << w << '\n';
    p->corpus = std::move(loaded.corpus);
  } else if (!config.prompts_jsonl.empty()) {
    std::ifstream in(config.prompts_jsonl);
    if (!in) throw InputError("cannot open " + config.prompts_jsonl.string());
    const auto parsed = read_prompt_jsonl(in);
    p->corpus = ingest(parsed.records, *p->embedder, config.filter).corpus;
  }
  if (!config.modifiers_tsv.empty() && fs::exists(config.modifiers_tsv)) {
    p->modifiers = ModifierCorpus::load(config.modifiers_tsv, *p->embedder);
  }
  if (!config.safety_terms.empty()) p->safety = substring_filter(config.safety_terms);
  return p;
}

}  // namespace workbench
