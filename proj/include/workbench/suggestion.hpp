#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "workbench/chat.hpp"
#include "workbench/corpus.hpp"
#include "workbench/embedding.hpp"

namespace workbench {

// {subject, modifier, modifier, ...}
struct StyledPrompt {
  std::string subject;
  std::vector<std::string> style_modifiers;

  std::string serialize() const;
  static StyledPrompt parse(std::string_view text);
  bool operator==(const StyledPrompt&) const = default;
};

struct SuggestionSet {
  std::string subject;                   // the atomic subject that seeded the set
  std::vector<std::string> suggestions;  // always 3
  std::vector<ChatMessage> transcript;   // the conversation so far, verbatim
  bool operator==(const SuggestionSet&) const = default;
};

struct FewShotPrompt {
  std::string preamble;
  std::vector<std::string> examples;
  std::string query_suffix;
  bool zero_shot = false;

  // Preamble, blank line, one example per line, then query_suffix as the last line.
  std::string render() const;
  std::string body() const;  // render() without the preamble
};

struct IntegrationExample {
  std::string prompt;
  std::string modifier;
  std::string integrated;
  std::string kind;  // "subject" | "style"
};

// Prompt wording lives under data/templates so it can be edited without a
// rebuild. Placeholders: {subject}, {style}, {instruction}, {problem}.
struct PromptTemplates {
  std::string version;
  std::string ideation;
  std::string steer;
  std::string reask;
  std::string style_preamble;
  std::string style_zero_shot;
  std::string integration_preamble;
  std::vector<IntegrationExample> integration_examples;

  static PromptTemplates load(const std::filesystem::path& dir);
  static PromptTemplates load_default();  // the copy shipped in the source tree
};

std::filesystem::path default_data_dir();

std::string fill_template(std::string text, const std::vector<std::pair<std::string, std::string>>& values);

// Numbered "1. ..." lines; empty when the text does not hold exactly 1..3.
std::vector<std::string> parse_numbered_suggestions(std::string_view text);

// Modifiers from a style completion. Braces, a trailing period and an echoed
// subject are stripped; phrases equal to the subject and repeats are dropped
// (case-insensitive exact match).
std::vector<std::string> parse_style_completion(std::string_view completion, std::string_view subject);

FewShotPrompt build_style_fewshot(std::span<const std::string> examples, std::string_view subject,
                                  std::string_view atomic_style, const PromptTemplates& templates);

struct TranscriptEntry {
  std::string task;
  std::string model_id;
  double temperature = 0.0;
  std::vector<ChatMessage> request;
  std::string response;
  std::string error;  // set when the provider call itself failed
  bool operator==(const TranscriptEntry&) const = default;
};

nlohmann::json transcript_entry_to_json(const TranscriptEntry& entry);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);

using TranscriptSink = std::function<void(const TranscriptEntry&)>;

struct EngineOptions {
  double ideation_temperature = 0.7;
  double style_temperature = 0.7;
  double integration_temperature = 0.2;
  std::size_t min_modifiers = 3;
  std::size_t style_examples = 10;
};

struct StyleExtension {
  StyledPrompt prompt;
  FewShotPrompt fewshot;
  std::vector<Neighbor> retrieved;
  bool zero_shot = false;
};

enum class IntegrationPath { unchanged, provider, naive_fallback };

struct IntegrationResult {
  std::string prompt;
  IntegrationPath path = IntegrationPath::provider;
};

std::string naive_integrate(std::string_view prompt, std::string_view modifier);

// Every provider exchange reaches the sink before the call returns or throws.
class SuggestionEngine {
 public:
  SuggestionEngine(const ChatProvider& provider, PromptTemplates templates, EngineOptions options = {},
                   TranscriptSink sink = {});

  SuggestionSet ideate_subjects(const std::string& atomic_subject) const;
  SuggestionSet steer_subjects(const SuggestionSet& set, const std::string& instruction) const;

  StyleExtension extend_style(const FilteredCorpus& corpus, const EmbeddingProvider& embedder,
                              const std::string& subject, const std::string& atomic_style) const;

  // Throws IntegrationError when the provider fails or answers with nothing.
  IntegrationResult integrate_modifier(const std::string& current_prompt, const std::string& modifier) const;
  // Same, but falls back to naive_integrate and flags it.
  IntegrationResult integrate_or_append(const std::string& current_prompt, const std::string& modifier) const;

 private:
  std::string exchange(const std::string& task, const std::vector<ChatMessage>& messages, double temperature,
                       const std::map<std::string, std::string>& context) const;
  SuggestionSet ask_for_three(std::string subject, std::vector<ChatMessage> messages,
                              const std::map<std::string, std::string>& context, const std::string& task) const;

  const ChatProvider& provider_;
  PromptTemplates templates_;
  EngineOptions options_;
  TranscriptSink sink_;
};

}  // namespace workbench
