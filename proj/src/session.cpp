#include "workbench/session.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <random>
#include <set>

#include "workbench/errors.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSessionFormat = "workbench-session";

std::string prompt_id(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%04zu", n);
  return buf;
}

std::string transcript_file(std::size_t n) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "transcripts/%04zu.json", n);
  return buf;
}

std::string image_file(const std::string& id) { return "images/" + id + ".png"; }

json embedding_to_json(const EmbeddingVector& v) {
  return {{"provider_id", v.provider_id},
          {"modality", to_string(v.modality)},
          {"normalized", v.normalized},
          {"values", v.values}};
}

EmbeddingVector embedding_from_json(const json& j) {
  EmbeddingVector v;
  v.provider_id = j.at("provider_id").get<std::string>();
  v.modality = modality_from_string(j.at("modality").get<std::string>());
  v.normalized = j.value("normalized", false);
  v.values = j.at("values").get<std::vector<double>>();
  return v;
}

std::vector<std::string> member_ids(const Session& s) {
  std::vector<std::string> ids;
  for (const auto* img : layout_members(s)) ids.push_back(img->id);
  return ids;
}

std::uint64_t fresh_entropy() {
  static std::atomic<std::uint64_t> counter{0};
  const auto now = static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
  std::random_device rd;
  return mix64((std::uint64_t{rd()} << 32) ^ rd() ^ now ^ mix64(counter.fetch_add(1) + 1));
}

void require(bool ok, std::vector<std::string>& problems, std::string message) {
  if (!ok) problems.push_back(std::move(message));
}

}  // namespace

const PromptEntry* Session::find_prompt(std::string_view pid) const {
  for (const auto& p : prompt_history) {
    if (p.id == pid) return &p;
  }
  return nullptr;
}

const GeneratedImage* Session::find_image(std::string_view iid) const {
  for (const auto& b : batches) {
    for (const auto& img : b.images) {
      if (img.id == iid) return &img;
    }
  }
  return nullptr;
}

Session create_session(const SessionOptions& options) {
  Session s;
  s.id = options.id.value_or("s" + to_hex(fresh_entropy()));
  s.layout_seed = options.layout_seed.value_or(fresh_entropy() & 0xffffffffULL);
  return s;
}

std::vector<const GeneratedImage*> layout_members(const Session& session) {
  std::vector<const GeneratedImage*> out;
  for (const auto& b : session.batches) {
    const PromptEntry* p = session.find_prompt(b.prompt_id);
    if (!p || !p->visible) continue;
    for (const auto& img : b.images) {
      if (!img.blocked && !img.failed && img.embedding) out.push_back(&img);
    }
  }
  return out;
}

LayoutUpdate recompute_layout(Session& session, const LayoutOptions& options) {
  const auto members = layout_members(session);
  std::vector<std::string> ids;
  std::vector<EmbeddingVector> embeddings;
  for (const auto* img : members) {
    ids.push_back(img->id);
    embeddings.push_back(*img->embedding);
  }
  const bool unchanged = session.current_layout ? session.current_layout->image_ids == ids : ids.empty();
  if (unchanged) return {};
  try {
    session.current_layout = layout_pipeline(ids, embeddings, session.layout_seed, options);
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  ++session.layout_version;
  return {true, {}};
}

RecordOutcome record_generation(Session& session, const std::string& prompt, const std::string& negative_prompt,
                                std::vector<GeneratedImage> images, const LayoutOptions& options) {
  if (trim(prompt).empty()) throw InputError("prompt is empty");
  RecordOutcome out;
  out.prompt_id = prompt_id(session.next_prompt++);
  for (auto& img : images) {
    img.id = image_id("img", session.next_image++);
    img.source_prompt_id = out.prompt_id;
    if (img.blocked) img.png.clear();
    out.image_ids.push_back(img.id);
  }
  session.prompt_history.push_back({out.prompt_id, prompt, negative_prompt, true});
  session.batches.push_back({out.prompt_id, std::move(images)});
  out.layout = recompute_layout(session, options);
  return out;
}

ToggleOutcome toggle_prompt(Session& session, const std::string& pid, bool visible, const LayoutOptions& options) {
  auto it = std::find_if(session.prompt_history.begin(), session.prompt_history.end(),
                         [&](const auto& p) { return p.id == pid; });
  if (it == session.prompt_history.end()) throw LookupError("unknown prompt " + pid);
  if (it->visible == visible) return {};
  it->visible = visible;
  return {true, recompute_layout(session, options)};
}

TranscriptSink session_sink(Session& session) {
  return [&session](const TranscriptEntry& e) { session.transcripts.push_back(e); };
}

std::vector<std::string> validate_session(const Session& s) {
  std::vector<std::string> problems;
  require(!s.id.empty(), problems, "session id is empty");

  std::set<std::string> prompt_ids;
  std::size_t last = 0;
  for (const auto& p : s.prompt_history) {
    require(prompt_ids.insert(p.id).second, problems, "duplicate prompt id " + p.id);
    std::size_t n = 0;
    const bool well_formed = p.id.size() > 1 && p.id[0] == 'p' && std::sscanf(p.id.c_str() + 1, "%zu", &n) == 1;
    require(well_formed, problems, "malformed prompt id " + p.id);
    require(n > last, problems, "prompt ids out of creation order at " + p.id);
    require(n < s.next_prompt, problems, "prompt id " + p.id + " not below next_prompt");
    last = std::max(last, n);
  }

  std::set<std::string> image_ids;
  for (const auto& b : s.batches) {
    require(prompt_ids.count(b.prompt_id) == 1, problems, "batch for unknown prompt " + b.prompt_id);
    for (const auto& img : b.images) {
      require(image_ids.insert(img.id).second, problems, "duplicate image id " + img.id);
      require(img.source_prompt_id == b.prompt_id, problems, "image " + img.id + " source prompt mismatch");
      require(prompt_ids.count(img.source_prompt_id) == 1, problems,
              "image " + img.id + " references unknown prompt " + img.source_prompt_id);
      require(!(img.blocked && img.has_pixels()), problems, "blocked image " + img.id + " carries pixels");
      if (img.embedding) {
        require(img.embedding->modality == Modality::image, problems, "image " + img.id + " has a text embedding");
      }
    }
  }

  const auto expected = member_ids(s);
  if (s.current_layout) {
    require(s.current_layout->image_ids == expected, problems,
            "layout does not cover exactly the visible unblocked images");
    for (const auto& p : validate_layout(*s.current_layout)) problems.push_back("layout: " + p);
    require(s.current_layout->reduction_seed == s.layout_seed, problems, "layout seed differs from session seed");
  } else {
    require(expected.empty(), problems, "visible images exist but no layout was computed");
  }

  std::size_t dim = 0;
  for (const auto* img : layout_members(s)) {
    if (dim == 0) dim = img->embedding->dimension();
    require(img->embedding->dimension() == dim, problems, "image " + img->id + " embedding dimension differs");
  }
  if (s.suggestions) {
    require(s.suggestions->suggestions.size() == 3, problems, "suggestion set does not hold 3 suggestions");
  }
  return problems;
}

json session_to_json(const Session& s) {
  json history = json::array();
  for (const auto& p : s.prompt_history) {
    history.push_back({{"id", p.id}, {"prompt", p.prompt}, {"negative_prompt", p.negative_prompt},
                       {"visible", p.visible}});
  }
  json batches = json::array();
  for (const auto& b : s.batches) {
    json images = json::array();
    for (const auto& img : b.images) {
      json ji{{"id", img.id},
              {"source_prompt_id", img.source_prompt_id},
              {"seed", img.seed},
              {"blocked", img.blocked},
              {"failed", img.failed},
              {"error", img.error},
              {"embed_error", img.embed_error}};
      ji["file"] = (img.blocked || img.failed) ? json(nullptr) : json(image_file(img.id));
      ji["embedding"] = img.embedding ? embedding_to_json(*img.embedding) : json(nullptr);
      images.push_back(std::move(ji));
    }
    batches.push_back({{"prompt_id", b.prompt_id}, {"images", std::move(images)}});
  }
  json transcripts = json::array();
  for (std::size_t i = 0; i < s.transcripts.size(); ++i) transcripts.push_back(transcript_file(i + 1));

  json j{{"format", kSessionFormat},
         {"schema_version", kSessionSchemaVersion},
         {"id", s.id},
         {"layout_seed", s.layout_seed},
         {"current_prompt", s.current_prompt},
         {"next_prompt", s.next_prompt},
         {"next_image", s.next_image},
         {"layout_version", s.layout_version},
         {"prompt_history", std::move(history)},
         {"batches", std::move(batches)},
         {"transcripts", std::move(transcripts)}};
  j["layout"] = s.current_layout ? layout_to_json(*s.current_layout) : json(nullptr);
  if (s.suggestions) {
    j["suggestions"] = {{"subject", s.suggestions->subject},
                        {"suggestions", s.suggestions->suggestions},
                        {"transcript", messages_to_json(s.suggestions->transcript)}};
  } else {
    j["suggestions"] = nullptr;
  }
  if (s.styled_prompt) {
    j["styled_prompt"] = {{"subject", s.styled_prompt->subject}, {"modifiers", s.styled_prompt->style_modifiers}};
  } else {
    j["styled_prompt"] = nullptr;
  }
  return j;
}

Session session_from_json(const json& j) {
  if (j.value("format", "") != kSessionFormat) throw FormatError("not a session document");
  const int version = j.value("schema_version", -1);
  if (version != kSessionSchemaVersion) {
    throw VersionError("session schema version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kSessionSchemaVersion) + ")");
  }
  Session s;
  try {
    s.id = j.at("id").get<std::string>();
    s.layout_seed = j.at("layout_seed").get<std::uint64_t>();
    s.current_prompt = j.value("current_prompt", "");
    s.next_prompt = j.at("next_prompt").get<std::size_t>();
    s.next_image = j.at("next_image").get<std::size_t>();
    s.layout_version = j.value("layout_version", std::uint64_t{0});
    for (const auto& p : j.at("prompt_history")) {
      s.prompt_history.push_back({p.at("id").get<std::string>(), p.at("prompt").get<std::string>(),
                                  p.value("negative_prompt", ""), p.at("visible").get<bool>()});
    }
    for (const auto& b : j.at("batches")) {
      Batch batch{b.at("prompt_id").get<std::string>(), {}};
      for (const auto& ji : b.at("images")) {
        GeneratedImage img;
        img.id = ji.at("id").get<std::string>();
        img.source_prompt_id = ji.at("source_prompt_id").get<std::string>();
        img.seed = ji.at("seed").get<std::uint64_t>();
        img.blocked = ji.value("blocked", false);
        img.failed = ji.value("failed", false);
        img.error = ji.value("error", "");
        img.embed_error = ji.value("embed_error", "");
        if (ji.contains("embedding") && !ji.at("embedding").is_null()) {
          img.embedding = embedding_from_json(ji.at("embedding"));
        }
        batch.images.push_back(std::move(img));
      }
      s.batches.push_back(std::move(batch));
    }
    if (!j.at("layout").is_null()) s.current_layout = layout_from_json(j.at("layout"));
    if (j.contains("suggestions") && !j.at("suggestions").is_null()) {
      const auto& js = j.at("suggestions");
      s.suggestions = SuggestionSet{js.at("subject").get<std::string>(),
                                    js.at("suggestions").get<std::vector<std::string>>(),
                                    messages_from_json(js.at("transcript"))};
    }
    if (j.contains("styled_prompt") && !j.at("styled_prompt").is_null()) {
      const auto& jp = j.at("styled_prompt");
      s.styled_prompt = StyledPrompt{jp.at("subject").get<std::string>(),
                                     jp.at("modifiers").get<std::vector<std::string>>()};
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed session document: ") + e.what());
  }
  return s;
}

void save_session(const Session& session, const fs::path& dir) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "transcripts");
  for (const auto& b : session.batches) {
    for (const auto& img : b.images) {
      if (img.has_pixels() && !img.blocked) write_file_atomic(dir / image_file(img.id), img.png);
    }
  }
  for (std::size_t i = 0; i < session.transcripts.size(); ++i) {
    write_file_atomic(dir / transcript_file(i + 1), transcript_entry_to_json(session.transcripts[i]).dump(2));
  }
  write_file_atomic(dir / "session.json", session_to_json(session).dump(2));
}

Session load_session(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_text_file(dir / "session.json"));
  } catch (const json::exception& e) {
    throw FormatError("session.json is not JSON: " + std::string(e.what()));
  }
  Session s = session_from_json(j);
  for (auto& b : s.batches) {
    for (auto& img : b.images) {
      if (img.blocked || img.failed) continue;
      const fs::path file = dir / image_file(img.id);
      if (fs::exists(file)) {
        img.png = read_binary_file(file);
      } else {
        img.missing = true;
      }
    }
  }
  try {
    for (const auto& rel : j.at("transcripts")) {
      s.transcripts.push_back(transcript_entry_from_json(json::parse(read_text_file(dir / rel.get<std::string>()))));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed transcript: " + std::string(e.what()));
  } catch (const InputError& e) {
    throw FormatError(std::string("missing transcript: ") + e.what());
  }
  return s;
}

std::vector<std::string> check_session_directory(const fs::path& dir) {
  std::vector<std::string> problems;
  json j;
  try {
    j = json::parse(read_text_file(dir / "session.json"));
  } catch (const std::exception& e) {
    return {std::string("session.json unreadable: ") + e.what()};
  }
  auto has = [&](const json& obj, const char* key, auto predicate, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!predicate(obj.at(key))) {
      problems.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  };
  const auto is_string = [](const json& v) { return v.is_string(); };
  const auto is_uint = [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v >= 0); };
  const auto is_bool = [](const json& v) { return v.is_boolean(); };
  const auto is_array = [](const json& v) { return v.is_array(); };
  const auto is_nullable_object = [](const json& v) { return v.is_null() || v.is_object(); };
  const auto is_nullable_string = [](const json& v) { return v.is_null() || v.is_string(); };

  has(j, "format", [](const json& v) { return v == kSessionFormat; }, "session");
  has(j, "schema_version", [](const json& v) { return v == kSessionSchemaVersion; }, "session");
  has(j, "id", is_string, "session");
  has(j, "layout_seed", is_uint, "session");
  has(j, "current_prompt", is_string, "session");
  has(j, "next_prompt", is_uint, "session");
  has(j, "next_image", is_uint, "session");
  has(j, "layout_version", is_uint, "session");
  has(j, "layout", is_nullable_object, "session");
  has(j, "suggestions", is_nullable_object, "session");
  has(j, "styled_prompt", is_nullable_object, "session");

  if (has(j, "prompt_history", is_array, "session")) {
    for (const auto& p : j.at("prompt_history")) {
      has(p, "id", is_string, "prompt");
      has(p, "prompt", is_string, "prompt");
      has(p, "negative_prompt", is_string, "prompt");
      has(p, "visible", is_bool, "prompt");
    }
  }
  if (has(j, "batches", is_array, "session")) {
    for (const auto& b : j.at("batches")) {
      has(b, "prompt_id", is_string, "batch");
      if (!has(b, "images", is_array, "batch")) continue;
      for (const auto& img : b.at("images")) {
        const std::string where = "image " + img.value("id", std::string("?"));
        has(img, "id", is_string, where);
        has(img, "source_prompt_id", is_string, where);
        has(img, "seed", is_uint, where);
        has(img, "blocked", is_bool, where);
        has(img, "failed", is_bool, where);
        has(img, "embedding", is_nullable_object, where);
        if (has(img, "file", is_nullable_string, where) && img.at("file").is_string()) {
          const fs::path file = dir / img.at("file").get<std::string>();
          if (!fs::exists(file)) problems.push_back(where + ": file " + file.string() + " does not exist");
        }
        if (img.value("blocked", false) && img.contains("file") && !img.at("file").is_null()) {
          problems.push_back(where + ": blocked image references pixels");
        }
      }
    }
  }
  if (has(j, "transcripts", is_array, "session")) {
    for (const auto& t : j.at("transcripts")) {
      if (!t.is_string() || !fs::exists(dir / t.get<std::string>())) {
        problems.push_back("transcript " + t.dump() + " does not exist");
      }
    }
  }
  if (j.contains("layout") && j.at("layout").is_object()) {
    try {
      for (const auto& p : validate_layout(layout_from_json(j.at("layout")))) problems.push_back("layout: " + p);
    } catch (const std::exception& e) {
      problems.push_back(std::string("layout unreadable: ") + e.what());
    }
  }
  if (problems.empty()) {
    try {
      for (const auto& p : validate_session(load_session(dir))) problems.push_back(p);
    } catch (const std::exception& e) {
      problems.push_back(std::string("session does not load: ") + e.what());
    }
  }
  return problems;
}

}  // namespace workbench
