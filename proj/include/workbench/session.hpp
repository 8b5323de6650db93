#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "workbench/generation.hpp"
#include "workbench/layout.hpp"
#include "workbench/suggestion.hpp"

namespace workbench {

inline constexpr int kSessionSchemaVersion = 1;

struct PromptEntry {
  std::string id;  // p0001, p0002, ...
  std::string prompt;
  std::string negative_prompt;
  bool visible = true;
  bool operator==(const PromptEntry&) const = default;
};

struct Batch {
  std::string prompt_id;
  std::vector<GeneratedImage> images;
  bool operator==(const Batch&) const = default;
};

struct Session {
  std::string id;
  std::uint64_t layout_seed = 0;
  std::vector<PromptEntry> prompt_history;
  std::vector<Batch> batches;
  std::optional<CanvasLayout> current_layout;
  std::vector<TranscriptEntry> transcripts;
  std::optional<SuggestionSet> suggestions;
  std::optional<StyledPrompt> styled_prompt;
  std::string current_prompt;
  std::size_t next_prompt = 1;
  std::size_t next_image = 1;
  std::uint64_t layout_version = 0;  // bumped on every recomputation

  const PromptEntry* find_prompt(std::string_view id) const;
  const GeneratedImage* find_image(std::string_view id) const;
  bool operator==(const Session&) const = default;
};

struct SessionOptions {
  std::optional<std::string> id;
  std::optional<std::uint64_t> layout_seed;
};

Session create_session(const SessionOptions& options = {});

// Images that belong on the canvas: visible prompt, not blocked, not failed,
// embedded. In batch order.
std::vector<const GeneratedImage*> layout_members(const Session& session);

struct LayoutUpdate {
  bool recomputed = false;
  std::string error;  // non-empty: the previous layout was kept
};

// No-op when the member set is unchanged.
LayoutUpdate recompute_layout(Session& session, const LayoutOptions& options = {});

struct RecordOutcome {
  std::string prompt_id;
  std::vector<std::string> image_ids;
  LayoutUpdate layout;
};

// Appends a visible prompt and its batch. Image ids and source_prompt_id are
// assigned here.
RecordOutcome record_generation(Session& session, const std::string& prompt, const std::string& negative_prompt,
                                std::vector<GeneratedImage> images, const LayoutOptions& options = {});

struct ToggleOutcome {
  bool changed = false;
  LayoutUpdate layout;
};

// Throws LookupError for an unknown prompt id.
ToggleOutcome toggle_prompt(Session& session, const std::string& prompt_id, bool visible,
                            const LayoutOptions& options = {});

TranscriptSink session_sink(Session& session);

// Every Session invariant; empty when sound.
std::vector<std::string> validate_session(const Session& session);

nlohmann::json session_to_json(const Session& session);  // as stored in session.json
Session session_from_json(const nlohmann::json& j);

// dir/session.json, dir/images/<id>.png, dir/transcripts/<n>.json
void save_session(const Session& session, const std::filesystem::path& dir);
// Throws VersionError for another schema version, FormatError for malformed
// documents. Missing image files are flagged, not fatal.
Session load_session(const std::filesystem::path& dir);

// Structural check of a saved session directory against the on-disk schema.
std::vector<std::string> check_session_directory(const std::filesystem::path& dir);

}  // namespace workbench
