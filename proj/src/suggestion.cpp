#include "workbench/suggestion.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>

#include "workbench/errors.hpp"
#include "workbench/util.hpp"

#ifndef WORKBENCH_DATA_DIR
#define WORKBENCH_DATA_DIR "data"
#endif

namespace workbench {

namespace {

constexpr std::size_t kMaxStyleExamples = 10;

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return trim(s);
}

std::string first_nonempty_line(std::string_view text) {
  for (const auto& line : split_lines(text)) {
    std::string t = trim(line);
    if (!t.empty()) return t;
  }
  return {};
}

std::string without_trailing_period(std::string s) {
  s = trim(s);
  while (!s.empty() && s.back() == '.') s.pop_back();
  return trim(s);
}

std::string read_template(const std::filesystem::path& dir, const nlohmann::json& manifest, const char* key) {
  if (!manifest.contains(key)) throw FormatError(std::string("template manifest lacks '") + key + "'");
  return trim(read_text_file(dir / manifest.at(key).get<std::string>()));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string StyledPrompt::serialize() const {
  std::string out = subject;
  for (const auto& m : style_modifiers) out += ", " + m;
  return out;
}

StyledPrompt StyledPrompt::parse(std::string_view text) {
  auto segments = split_segments(text);
  StyledPrompt p;
  if (segments.empty()) return p;
  p.subject = std::move(segments.front());
  p.style_modifiers.assign(std::make_move_iterator(segments.begin() + 1), std::make_move_iterator(segments.end()));
  return p;
}

std::string FewShotPrompt::body() const {
  std::string out;
  for (const auto& e : examples) out += e + "\n";
  return out + query_suffix;
}

std::string FewShotPrompt::render() const { return preamble + "\n\n" + body(); }

// ---------------------------------------------------------------------------

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("WORKBENCH_DATA_DIR"); env && *env) return env;
  return WORKBENCH_DATA_DIR;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("template manifest is not JSON: " + std::string(e.what()));
  }
  PromptTemplates t;
  t.version = manifest.value("version", "");
  t.ideation = read_template(dir, manifest, "ideation");
  t.steer = read_template(dir, manifest, "steer");
  t.reask = read_template(dir, manifest, "reask");
  t.style_preamble = read_template(dir, manifest, "style_preamble");
  t.style_zero_shot = read_template(dir, manifest, "style_zero_shot");
  t.integration_preamble = read_template(dir, manifest, "integration_preamble");
  try {
    const auto examples = nlohmann::json::parse(
        read_text_file(dir / manifest.at("integration_examples").get<std::string>()));
    for (const auto& e : examples.at("examples")) {
      t.integration_examples.push_back({e.at("prompt").get<std::string>(), e.at("modifier").get<std::string>(),
                                        e.at("integrated").get<std::string>(), e.value("kind", "")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("integration examples are malformed: " + std::string(e.what()));
  }
  return t;
}

PromptTemplates PromptTemplates::load_default() { return load(default_data_dir() / "templates"); }

std::string fill_template(std::string text, const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [name, value] : values) {
    const std::string token = "{" + name + "}";
    for (std::size_t pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
      text.replace(pos, token.size(), value);
    }
  }
  return text;
}

// ---------------------------------------------------------------------------

std::vector<std::string> parse_numbered_suggestions(std::string_view text) {
  static const std::regex numbered(R"(^\s*(\d+)\s*[.):]\s*(.+)$)");
  std::vector<std::string> items;
  int expected = 1;
  for (const auto& line : split_lines(text)) {
    std::smatch m;
    if (!std::regex_match(line, m, numbered)) continue;
    if (std::stoi(m[1].str()) != expected) return {};
    ++expected;
    std::string item = strip_quotes(trim(m[2].str()));
    if (item.empty()) return {};
    items.push_back(std::move(item));
  }
  if (items.size() != 3) return {};
  return items;
}

std::vector<std::string> parse_style_completion(std::string_view completion, std::string_view subject) {
  std::string line = first_nonempty_line(completion);
  line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == '{' || c == '}'; }), line.end());
  line = without_trailing_period(line);
  const std::string core = without_trailing_period(std::string(subject));
  for (const std::string& echo : {std::string(subject), core}) {
    if (!echo.empty() && istarts_with(line, echo)) {
      line = line.substr(echo.size());
      break;
    }
  }
  std::vector<std::string> out;
  for (auto& phrase : split_segments(line)) {
    phrase = without_trailing_period(phrase);
    if (phrase.empty() || iequals(phrase, subject) || iequals(phrase, core)) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& p) { return iequals(p, phrase); });
    if (!seen) out.push_back(std::move(phrase));
  }
  return out;
}

FewShotPrompt build_style_fewshot(std::span<const std::string> examples, std::string_view subject,
                                  std::string_view atomic_style, const PromptTemplates& templates) {
  if (examples.size() > kMaxStyleExamples) {
    throw ContractViolation("build_style_fewshot: at most 10 examples");
  }
  FewShotPrompt p;
  const std::vector<std::pair<std::string, std::string>> values{{"style", std::string(atomic_style)},
                                                                {"subject", std::string(subject)}};
  p.zero_shot = examples.empty();
  p.preamble = fill_template(p.zero_shot ? templates.style_zero_shot : templates.style_preamble, values);
  for (const auto& e : examples) p.examples.push_back(trim(collapse_newlines(e)));
  p.query_suffix = collapse_newlines(subject) + ", " + collapse_newlines(atomic_style) + ",";
  return p;
}

std::string naive_integrate(std::string_view prompt, std::string_view modifier) {
  return std::string(prompt) + ", " + std::string(modifier);
}

nlohmann::json transcript_entry_to_json(const TranscriptEntry& entry) {
  nlohmann::json j{{"task", entry.task},
                   {"model", entry.model_id},
                   {"temperature", entry.temperature},
                   {"request", messages_to_json(entry.request)},
                   {"response", entry.response}};
  if (!entry.error.empty()) j["error"] = entry.error;
  return j;
}

TranscriptEntry transcript_entry_from_json(const nlohmann::json& j) {
  TranscriptEntry e;
  e.task = j.at("task").get<std::string>();
  e.model_id = j.value("model", "");
  e.temperature = j.value("temperature", 0.0);
  e.request = messages_from_json(j.at("request"));
  e.response = j.value("response", "");
  e.error = j.value("error", "");
  return e;
}

// ---------------------------------------------------------------------------

SuggestionEngine::SuggestionEngine(const ChatProvider& provider, PromptTemplates templates, EngineOptions options,
                                   TranscriptSink sink)
    : provider_(provider), templates_(std::move(templates)), options_(options), sink_(std::move(sink)) {}

std::string SuggestionEngine::exchange(const std::string& task, const std::vector<ChatMessage>& messages,
                                       double temperature, const std::map<std::string, std::string>& context) const {
  ChatRequest request{task, messages, temperature, context};
  TranscriptEntry entry{task, provider_.model_id(), temperature, messages, {}, {}};
  try {
    entry.response = provider_.complete(request);
  } catch (const std::exception& e) {
    entry.error = e.what();
    if (sink_) sink_(entry);
    throw;
  }
  if (sink_) sink_(entry);
  return entry.response;
}

SuggestionSet SuggestionEngine::ask_for_three(std::string subject, std::vector<ChatMessage> messages,
                                              const std::map<std::string, std::string>& context,
                                              const std::string& task) const {
  std::string raw = exchange(task, messages, options_.ideation_temperature, context);
  auto items = parse_numbered_suggestions(raw);
  if (items.empty()) {
    messages.push_back({"assistant", raw});
    messages.push_back({"user", fill_template(templates_.reask,
                                              {{"problem", "It did not contain exactly three numbered suggestions."}})});
    raw = exchange(task, messages, options_.ideation_temperature, context);
    items = parse_numbered_suggestions(raw);
    if (items.empty()) throw SuggestionError("expected three numbered suggestions", raw);
  }
  messages.push_back({"assistant", raw});
  return {std::move(subject), std::move(items), std::move(messages)};
}

SuggestionSet SuggestionEngine::ideate_subjects(const std::string& atomic_subject) const {
  const std::string subject = trim(atomic_subject);
  if (subject.empty()) throw InputError("atomic subject is empty");
  std::vector<ChatMessage> messages{{"user", fill_template(templates_.ideation, {{"subject", subject}})}};
  return ask_for_three(subject, std::move(messages), {{"subject", subject}}, "ideate");
}

SuggestionSet SuggestionEngine::steer_subjects(const SuggestionSet& set, const std::string& instruction) const {
  const std::string text = trim(instruction);
  if (text.empty()) throw InputError("steering instruction is empty");
  if (set.transcript.empty()) throw ContractViolation("steer_subjects: suggestion set has no transcript");
  std::vector<ChatMessage> messages = set.transcript;
  messages.push_back({"user", fill_template(templates_.steer, {{"instruction", text}})});
  return ask_for_three(set.subject, std::move(messages), {{"subject", set.subject}, {"instruction", text}},
                       "steer");
}

StyleExtension SuggestionEngine::extend_style(const FilteredCorpus& corpus, const EmbeddingProvider& embedder,
                                              const std::string& subject, const std::string& atomic_style) const {
  const std::string core = without_trailing_period(subject);
  const std::string style = trim(atomic_style);
  if (core.empty()) throw InputError("subject is empty");
  if (style.empty()) throw InputError("atomic style is empty");

  StyleExtension out;
  std::vector<std::string> examples;
  if (!corpus.empty()) {
    out.retrieved = corpus.knn(embedder.embed_text(style), std::min(options_.style_examples, kMaxStyleExamples));
    for (const auto& n : out.retrieved) examples.push_back(corpus.find(n.id)->text);
  }
  out.fewshot = build_style_fewshot(examples, core, style, templates_);
  out.zero_shot = out.fewshot.zero_shot;

  std::string joined;
  for (const auto& e : out.fewshot.examples) joined += e + "\n";
  const std::map<std::string, std::string> context{{"subject", core}, {"style", style}, {"examples", joined}};
  std::vector<ChatMessage> messages{{"system", out.fewshot.preamble}, {"user", out.fewshot.body()}};

  std::string raw = exchange("style", messages, options_.style_temperature, context);
  auto modifiers = parse_style_completion(raw, core);
  if (modifiers.size() < options_.min_modifiers) {
    messages.push_back({"assistant", raw});
    messages.push_back({"user", fill_template(templates_.reask,
                                              {{"problem", "It held fewer than " + std::to_string(options_.min_modifiers) +
                                                               " comma-separated style modifiers."}})});
    raw = exchange("style", messages, options_.style_temperature, context);
    modifiers = parse_style_completion(raw, core);
    if (modifiers.size() < options_.min_modifiers) throw SuggestionError("too few style modifiers", raw);
  }
  const bool has_style = std::any_of(modifiers.begin(), modifiers.end(),
                                     [&](const auto& m) { return icontains(m, style); });
  if (!has_style) modifiers.insert(modifiers.begin(), style);
  out.prompt = {core, std::move(modifiers)};
  return out;
}

IntegrationResult SuggestionEngine::integrate_modifier(const std::string& current_prompt,
                                                       const std::string& modifier) const {
  const std::string prompt = trim(current_prompt);
  const std::string mod = trim(modifier);
  if (prompt.empty() || mod.empty()) throw InputError("prompt and modifier must be non-empty");
  if (prompt.find(mod) != std::string::npos) return {prompt, IntegrationPath::unchanged};

  std::string body;
  for (const auto& e : templates_.integration_examples) {
    body += "Prompt: " + e.prompt + "\nModifier: " + e.modifier + "\nIntegrated: " + e.integrated + "\n\n";
  }
  body += "Prompt: " + prompt + "\nModifier: " + mod + "\nIntegrated:";
  const std::vector<ChatMessage> messages{{"system", templates_.integration_preamble}, {"user", body}};

  std::string raw;
  try {
    raw = exchange("integrate", messages, options_.integration_temperature, {{"prompt", prompt}, {"modifier", mod}});
  } catch (const ProviderError& e) {
    throw IntegrationError(std::string("integration provider failed: ") + e.what());
  }
  std::string line = first_nonempty_line(raw);
  if (istarts_with(line, "Integrated:")) line = trim(line.substr(11));
  line = strip_quotes(line);
  if (line.empty()) throw IntegrationError("integration provider returned nothing");
  return {line, IntegrationPath::provider};
}

IntegrationResult SuggestionEngine::integrate_or_append(const std::string& current_prompt,
                                                        const std::string& modifier) const {
  try {
    return integrate_modifier(current_prompt, modifier);
  } catch (const IntegrationError&) {
    return {naive_integrate(trim(current_prompt), trim(modifier)), IntegrationPath::naive_fallback};
  }
}

}  // namespace workbench
