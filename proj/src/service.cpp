#include "workbench/service.hpp"

#include <cmath>

#include "workbench/errors.hpp"
#include "workbench/image.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string job_id(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "j%04zu", n);
  return buf;
}

json suggestions_json(const Session& s) {
  return {{"suggestions", s.suggestions ? s.suggestions->suggestions : std::vector<std::string>{}},
          {"current_prompt", s.current_prompt}};
}

std::vector<EmbeddingVector> layout_embeddings(const Session& s, const CanvasLayout& layout) {
  std::vector<EmbeddingVector> out;
  out.reserve(layout.size());
  for (const auto& id : layout.image_ids) {
    const GeneratedImage* img = s.find_image(id);
    if (!img || !img->embedding) throw ContractViolation("layout image " + id + " has no embedding");
    out.push_back(*img->embedding);
  }
  return out;
}

json point_json(Point2 p) { return {{"x", p.x}, {"y", p.y}}; }

}  // namespace

json JobStatus::to_json() const {
  json j{{"job_id", id},        {"session_id", session_id}, {"state", state},
         {"prompt_id", prompt_id}, {"image_ids", image_ids}, {"blocked", blocked},
         {"failed", failed}};
  if (!error.empty()) j["error"] = error;
  if (!layout_error.empty()) j["layout_error"] = layout_error;
  return j;
}

Workbench::Workbench(Config config) : Workbench(config, Providers::build(config)) {}

Workbench::Workbench(Config config, std::unique_ptr<Providers> providers)
    : config_(std::move(config)), providers_(std::move(providers)) {
  if (!config_.session_store.empty()) fs::create_directories(config_.session_store);
}

Workbench::~Workbench() { wait_for_jobs(); }

void Workbench::wait_for_jobs() {
  std::vector<std::future<void>> pending;
  {
    std::lock_guard lock(jobs_mutex_);
    pending.swap(running_);
  }
  for (auto& f : pending) f.wait();
}

std::shared_ptr<Workbench::Slot> Workbench::slot(const std::string& sid) const {
  std::lock_guard lock(registry_mutex_);
  if (const auto it = sessions_.find(sid); it != sessions_.end()) return it->second;
  if (!config_.session_store.empty() && !sid.empty() && sid.find('/') == std::string::npos &&
      sid.find("..") == std::string::npos) {
    const fs::path dir = config_.session_store / sid;
    if (fs::exists(dir / "session.json")) {
      auto s = std::make_shared<Slot>();
      s->session = load_session(dir);
      sessions_.emplace(sid, s);
      return s;
    }
  }
  throw LookupError("unknown session " + sid);
}

void Workbench::persist(const Slot& s) const {
  if (!config_.session_store.empty()) save_session(s.session, config_.session_store / s.session.id);
}

void Workbench::save_recording() const {
  if (providers_->recorder) providers_->recorder->save(config_.record_chat);
}

SuggestionEngine Workbench::engine(Session& session) const {
  return SuggestionEngine(providers_->chat(), providers_->templates, config_.engine, session_sink(session));
}

json Workbench::create_session(std::optional<std::uint64_t> layout_seed) {
  auto s = std::make_shared<Slot>();
  s->session = workbench::create_session({std::nullopt, layout_seed});
  {
    std::lock_guard lock(registry_mutex_);
    sessions_.emplace(s->session.id, s);
  }
  std::lock_guard lock(s->mutex);
  persist(*s);
  return {{"id", s->session.id}, {"layout_seed", s->session.layout_seed}};
}

json Workbench::ideate(const std::string& sid, const std::string& subject) {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  Session& session = s->session;
  try {
    session.suggestions = engine(session).ideate_subjects(subject);
  } catch (...) {
    persist(*s);
    save_recording();
    throw;
  }
  session.current_prompt = session.suggestions->suggestions.front();
  persist(*s);
  save_recording();
  return suggestions_json(session);
}

json Workbench::steer(const std::string& sid, const std::string& instruction) {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  Session& session = s->session;
  if (!session.suggestions) throw InputError("nothing to steer: ideate first");
  try {
    session.suggestions = engine(session).steer_subjects(*session.suggestions, instruction);
  } catch (...) {
    persist(*s);
    save_recording();
    throw;
  }
  session.current_prompt = session.suggestions->suggestions.front();
  persist(*s);
  save_recording();
  return suggestions_json(session);
}

json Workbench::extend_style(const std::string& sid, std::optional<std::size_t> subject_index,
                             const std::string& atomic_style, const std::string& subject) {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  Session& session = s->session;
  std::string chosen = subject;
  if (trim(chosen).empty()) {
    if (subject_index) {
      if (!session.suggestions || *subject_index >= session.suggestions->suggestions.size()) {
        throw InputError("subject_index does not name a current suggestion");
      }
      chosen = session.suggestions->suggestions[*subject_index];
    } else {
      chosen = session.current_prompt;
    }
  }
  StyleExtension ext;
  try {
    ext = engine(session).extend_style(providers_->corpus, *providers_->embedder, chosen, atomic_style);
  } catch (...) {
    persist(*s);
    save_recording();
    throw;
  }
  session.styled_prompt = ext.prompt;
  session.current_prompt = ext.prompt.serialize();
  persist(*s);
  save_recording();
  json examples = json::array();
  for (const auto& n : ext.retrieved) examples.push_back({{"id", n.id}, {"similarity", n.similarity}});
  return {{"prompt", session.current_prompt},
          {"subject", ext.prompt.subject},
          {"modifiers", ext.prompt.style_modifiers},
          {"zero_shot", ext.zero_shot},
          {"examples", examples}};
}

GenerationRequest Workbench::build_request(const Session& session, const json& body) const {
  json merged = request_to_json(config_.generation_defaults);
  merged["seed"] = nullptr;
  merged["batch_size"] = 1;
  if (body.is_object()) {
    for (const auto& [k, v] : body.items()) merged[k] = v;
  }
  if (merged.value("prompt", "").empty()) merged["prompt"] = session.current_prompt;
  GenerationRequest r = request_from_json(merged);
  r.validate();
  return r;
}

JobStatus Workbench::run_generation(const std::string& sid, const GenerationRequest& request, JobStatus status) {
  BatchOptions options;
  options.safety = providers_->safety;
  options.concurrency = config_.generation_concurrency;
  std::vector<GeneratedImage> images;
  try {
    images = generate_batch(*providers_->backend, request, options);
    embed_batch(*providers_->embedder, images);
  } catch (const std::exception& e) {
    status.state = "failed";
    status.error = e.what();
    return status;
  }
  for (const auto& img : images) {
    status.blocked += img.blocked;
    status.failed += img.failed;
  }
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  const auto outcome = record_generation(s->session, request.prompt, request.negative_prompt, std::move(images));
  status.state = "done";
  status.prompt_id = outcome.prompt_id;
  status.image_ids = outcome.image_ids;
  status.layout_error = outcome.layout.error;
  persist(*s);
  return status;
}

json Workbench::start_generation(const std::string& sid, const json& body) {
  GenerationRequest request;
  {
    auto s = slot(sid);
    std::lock_guard lock(s->mutex);
    request = build_request(s->session, body);
  }
  JobStatus status;
  status.session_id = sid;
  {
    std::lock_guard lock(jobs_mutex_);
    status.id = job_id(next_job_++);
    jobs_[status.id] = status;
  }
  auto task = [this, sid, request, status]() mutable {
    {
      std::lock_guard lock(jobs_mutex_);
      jobs_[status.id].state = "running";
    }
    status.state = "running";
    JobStatus done;
    try {
      done = run_generation(sid, request, status);
    } catch (const std::exception& e) {
      done = status;
      done.state = "failed";
      done.error = e.what();
    }
    std::lock_guard lock(jobs_mutex_);
    jobs_[done.id] = done;
  };
  std::lock_guard lock(jobs_mutex_);
  running_.push_back(std::async(std::launch::async, std::move(task)));
  return {{"job_id", status.id}, {"state", "queued"}};
}

json Workbench::generate_now(const std::string& sid, const json& body) {
  GenerationRequest request;
  {
    auto s = slot(sid);
    std::lock_guard lock(s->mutex);
    request = build_request(s->session, body);
  }
  JobStatus status;
  status.session_id = sid;
  {
    std::lock_guard lock(jobs_mutex_);
    status.id = job_id(next_job_++);
  }
  status = run_generation(sid, request, status);
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_[status.id] = status;
  }
  if (status.state == "failed") throw GenerationError(status.error);
  return status.to_json();
}

json Workbench::job(const std::string& sid, const std::string& jid) const {
  std::lock_guard lock(jobs_mutex_);
  const auto it = jobs_.find(jid);
  if (it == jobs_.end() || it->second.session_id != sid) throw LookupError("unknown job " + jid);
  return it->second.to_json();
}

json Workbench::layout(const std::string& sid, std::optional<double> scale) const {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  const Session& session = s->session;
  CanvasLayout base;
  if (session.current_layout) base = *session.current_layout;
  base.reduction_seed = session.layout_seed;
  const ScaleOutcome scaled = apply_scale(base, scale.value_or(1.0));
  json out = layout_export_json(scaled.layout);
  out["clamped"] = scaled.clamped;
  out["layout_version"] = session.layout_version;
  out["degenerate_clustering"] = scaled.layout.degenerate_clustering;
  json minimap = json::array();
  for (const auto& m : minimap_summary(scaled.layout)) {
    minimap.push_back({{"cluster", m.cluster_id},
                       {"color", m.color},
                       {"centroid", point_json(m.centroid)},
                       {"bbox_min", point_json(m.bbox_min)},
                       {"bbox_max", point_json(m.bbox_max)}});
  }
  out["minimap"] = std::move(minimap);
  return out;
}

json Workbench::menu(const std::string& sid, const std::string& image_id) const {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  const Session& session = s->session;
  if (!session.current_layout) throw LookupError("session has no layout yet");
  const GeneratedImage* img = session.find_image(image_id);
  const auto embeddings = layout_embeddings(session, *session.current_layout);
  std::span<const std::uint8_t> png;
  if (img) png = img->png;
  return menu_to_json(image_menu(image_id, *session.current_layout, embeddings, providers_->modifiers,
                                 *providers_->captioner, png, config_.menu_size));
}

json Workbench::integrate(const std::string& sid, const std::string& modifier, const std::string& prompt,
                          bool allow_fallback) {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  Session& session = s->session;
  const std::string current = trim(prompt).empty() ? session.current_prompt : prompt;
  if (trim(current).empty()) throw InputError("no prompt to integrate into");
  IntegrationResult result;
  try {
    const auto e = engine(session);
    result = allow_fallback ? e.integrate_or_append(current, modifier) : e.integrate_modifier(current, modifier);
  } catch (...) {
    persist(*s);
    save_recording();
    throw;
  }
  session.current_prompt = result.prompt;
  persist(*s);
  save_recording();
  const char* path = result.path == IntegrationPath::unchanged  ? "unchanged"
                     : result.path == IntegrationPath::provider ? "provider"
                                                                : "naive_fallback";
  return {{"prompt", result.prompt}, {"path", path}, {"fallback", result.path == IntegrationPath::naive_fallback}};
}

json Workbench::set_visible(const std::string& sid, const std::string& prompt_id, bool visible) {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  const auto outcome = toggle_prompt(s->session, prompt_id, visible);
  if (outcome.changed) persist(*s);
  json out{{"prompt_id", prompt_id},
           {"visible", visible},
           {"changed", outcome.changed},
           {"layout_version", s->session.layout_version}};
  if (!outcome.layout.error.empty()) out["layout_error"] = outcome.layout.error;
  return out;
}

json Workbench::summary(const std::string& sid) const {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  const Session& session = s->session;
  json prompts = json::array();
  for (const auto& p : session.prompt_history) {
    json images = json::array();
    for (const auto& b : session.batches) {
      if (b.prompt_id != p.id) continue;
      for (const auto& img : b.images) {
        images.push_back({{"id", img.id}, {"seed", img.seed}, {"blocked", img.blocked}, {"failed", img.failed},
                          {"missing", img.missing}});
      }
    }
    prompts.push_back({{"id", p.id}, {"prompt", p.prompt}, {"negative_prompt", p.negative_prompt},
                       {"visible", p.visible}, {"images", images}});
  }
  return {{"id", session.id},
          {"layout_seed", session.layout_seed},
          {"current_prompt", session.current_prompt},
          {"suggestions", session.suggestions ? session.suggestions->suggestions : std::vector<std::string>{}},
          {"prompts", prompts},
          {"layout_version", session.layout_version},
          {"transcript_entries", session.transcripts.size()}};
}

std::vector<std::uint8_t> Workbench::image_png(const std::string& sid, const std::string& image_id,
                                               std::optional<int> size) const {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  const GeneratedImage* img = s->session.find_image(image_id);
  if (!img) throw LookupError("unknown image " + image_id);
  if (!img->has_pixels()) throw LookupError("image " + image_id + " has no pixels");
  if (!size) return img->png;
  if (*size < 1) throw InputError("size must be positive");
  return encode_png(downscale(decode_png(img->png), *size));
}

Session Workbench::snapshot(const std::string& sid) const {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  return s->session;
}

void Workbench::save(const std::string& sid, const fs::path& dir) const {
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  save_session(s->session, dir);
}

std::string Workbench::import_session(const fs::path& dir) {
  auto s = std::make_shared<Slot>();
  s->session = load_session(dir);
  const std::string id = s->session.id;
  {
    std::lock_guard lock(registry_mutex_);
    sessions_[id] = s;
  }
  std::lock_guard lock(s->mutex);
  persist(*s);
  return id;
}

}  // namespace workbench
