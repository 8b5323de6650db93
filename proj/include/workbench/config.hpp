#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "workbench/chat.hpp"
#include "workbench/corpus.hpp"
#include "workbench/embedding.hpp"
#include "workbench/generation.hpp"
#include "workbench/layout.hpp"
#include "workbench/modifiers.hpp"
#include "workbench/suggestion.hpp"

namespace workbench {

// Provider selection block: {"kind": "...", plus kind-specific keys}.
struct ProviderSpec {
  std::string kind;
  nlohmann::json settings = nlohmann::json::object();
};

struct Config {
  ProviderSpec embedding{"stub", {{"dimension", 64}, {"seed", 0}}};
  ProviderSpec caption{"stub", nlohmann::json::object()};
  ProviderSpec chat{"mock", nlohmann::json::object()};
  ProviderSpec image_backend{"mock", nlohmann::json::object()};

  std::filesystem::path templates_dir;   // default: <data>/templates
  std::filesystem::path corpus;          // saved corpus (.jsonl + .vec); takes precedence
  std::filesystem::path prompts_jsonl;   // raw prompts ingested at startup when no corpus is given
  std::filesystem::path modifiers_tsv;   // default: <data>/modifiers.tsv
  std::filesystem::path session_store;   // empty: sessions live in memory only
  std::filesystem::path record_chat;     // when set, every chat exchange is saved here as a fixture

  FilterConfig filter;
  EngineOptions engine;
  GenerationRequest generation_defaults;
  std::vector<std::string> safety_terms;  // empty: filter off
  std::size_t menu_size = kDefaultMenuSize;
  std::size_t generation_concurrency = 4;

  static Config defaults();  // bundled data, all-offline providers
  static Config from_json(const nlohmann::json& j);
  static Config load(const std::filesystem::path& path);
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderSpec& spec);
std::unique_ptr<CaptionProvider> make_caption_provider(const ProviderSpec& spec);
std::unique_ptr<ChatProvider> make_chat_provider(const ProviderSpec& spec);
std::unique_ptr<ImageBackend> make_image_backend(const ProviderSpec& spec);

HttpEndpoint endpoint_from_json(const nlohmann::json& settings);

// Everything built from a Config. Immutable once constructed, so it can be
// shared across sessions and threads.
struct Providers {
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<CaptionProvider> captioner;
  std::unique_ptr<ChatProvider> chat_inner;
  std::unique_ptr<RecordingChatProvider> recorder;  // wraps chat_inner when recording
  std::unique_ptr<ImageBackend> backend;
  PromptTemplates templates;
  FilteredCorpus corpus;
  ModifierCorpus modifiers;
  SafetyFilter safety;

  const ChatProvider& chat() const { return recorder ? *recorder : *chat_inner; }
  static std::unique_ptr<Providers> build(const Config& config);
};

}  // namespace workbench
