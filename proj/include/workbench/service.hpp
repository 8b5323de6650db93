#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "workbench/config.hpp"
#include "workbench/session.hpp"

namespace workbench {

struct JobStatus {
  std::string id;
  std::string session_id;
  std::string state = "queued";  // queued | running | done | failed
  std::string prompt_id;
  std::vector<std::string> image_ids;
  std::size_t blocked = 0;
  std::size_t failed = 0;
  std::string error;
  std::string layout_error;

  nlohmann::json to_json() const;
};

// The operations behind every HTTP route and CLI subcommand. Each returns the
// JSON body the HTTP API sends. Writes to one session are serialized; distinct
// sessions proceed independently.
class Workbench {
 public:
  explicit Workbench(Config config);
  Workbench(Config config, std::unique_ptr<Providers> providers);
  ~Workbench();

  Workbench(const Workbench&) = delete;
  Workbench& operator=(const Workbench&) = delete;

  const Config& config() const noexcept { return config_; }
  const Providers& providers() const noexcept { return *providers_; }

  nlohmann::json create_session(std::optional<std::uint64_t> layout_seed = std::nullopt);
  nlohmann::json ideate(const std::string& sid, const std::string& subject);
  nlohmann::json steer(const std::string& sid, const std::string& instruction);
  // subject_index picks one of the current suggestions; an explicit subject wins.
  nlohmann::json extend_style(const std::string& sid, std::optional<std::size_t> subject_index,
                              const std::string& atomic_style, const std::string& subject = {});
  // Body: {prompt?, negative_prompt?, batch_size?, seed?, steps?, ...}. Missing
  // prompt means the session's current prompt.
  nlohmann::json start_generation(const std::string& sid, const nlohmann::json& body);
  nlohmann::json generate_now(const std::string& sid, const nlohmann::json& body);
  nlohmann::json job(const std::string& sid, const std::string& job_id) const;
  nlohmann::json layout(const std::string& sid, std::optional<double> scale) const;
  nlohmann::json menu(const std::string& sid, const std::string& image_id) const;
  // Integration failure rethrows IntegrationError unless allow_fallback is set.
  nlohmann::json integrate(const std::string& sid, const std::string& modifier, const std::string& prompt = {},
                           bool allow_fallback = false);
  nlohmann::json set_visible(const std::string& sid, const std::string& prompt_id, bool visible);
  nlohmann::json summary(const std::string& sid) const;

  // PNG bytes, optionally downscaled so the longer side is at most `size`.
  std::vector<std::uint8_t> image_png(const std::string& sid, const std::string& image_id,
                                      std::optional<int> size) const;

  Session snapshot(const std::string& sid) const;
  void save(const std::string& sid, const std::filesystem::path& dir) const;
  // Imports a saved session directory; returns its id.
  std::string import_session(const std::filesystem::path& dir);
  void wait_for_jobs();

 private:
  struct Slot {
    mutable std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Slot> slot(const std::string& sid) const;
  void persist(const Slot& s) const;
  void save_recording() const;
  SuggestionEngine engine(Session& session) const;
  GenerationRequest build_request(const Session& session, const nlohmann::json& body) const;
  JobStatus run_generation(const std::string& sid, const GenerationRequest& request, JobStatus status);

  Config config_;
  std::unique_ptr<Providers> providers_;

  mutable std::mutex registry_mutex_;
  mutable std::map<std::string, std::shared_ptr<Slot>> sessions_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, JobStatus> jobs_;
  std::vector<std::future<void>> running_;
  std::size_t next_job_ = 1;
};

}  // namespace workbench
