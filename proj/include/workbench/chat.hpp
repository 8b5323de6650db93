#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "workbench/http_json.hpp"

namespace workbench {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> messages_from_json(const nlohmann::json& j);

struct ChatRequest {
  std::string task;  // ideate | steer | style | integrate
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  // Structured hints (subject, style, examples...) for offline providers.
  // Never sent over the wire and not part of the fixture key.
  std::map<std::string, std::string> context;
};

enum class ChatProviderKind { remote_http, transcript_fixture, offline_mock };

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatProviderKind kind() const = 0;
  virtual std::string model_id() const = 0;
  // Returns the assistant message content.
  virtual std::string complete(const ChatRequest& request) const = 0;
};

// Hex FNV-1a of the canonical {model, temperature, messages} JSON.
std::string request_key(const std::string& model_id, const ChatRequest& request);

// OpenAI-compatible chat completions endpoint.
class HttpChatProvider final : public ChatProvider {
 public:
  HttpChatProvider(HttpEndpoint endpoint, std::string model_id)
      : endpoint_(std::move(endpoint)), model_(std::move(model_id)) {}
  ChatProviderKind kind() const override { return ChatProviderKind::remote_http; }
  std::string model_id() const override { return model_; }
  std::string complete(const ChatRequest& request) const override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
};

struct RecordedExchange {
  std::string key;
  std::string task;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::string response;
};

// Replays exchanges from a fixture file keyed by request hash. Unrecorded
// requests raise ProviderError.
class FixtureChatProvider final : public ChatProvider {
 public:
  FixtureChatProvider(std::string model_id, std::vector<RecordedExchange> exchanges);
  static FixtureChatProvider load(const std::filesystem::path& path);

  ChatProviderKind kind() const override { return ChatProviderKind::transcript_fixture; }
  std::string model_id() const override { return model_; }
  std::string complete(const ChatRequest& request) const override;
  std::size_t size() const noexcept { return by_key_.size(); }

 private:
  std::string model_;
  std::map<std::string, RecordedExchange> by_key_;
};

// Forwards to an inner provider and keeps every exchange for save().
class RecordingChatProvider final : public ChatProvider {
 public:
  explicit RecordingChatProvider(const ChatProvider& inner) : inner_(inner) {}
  ChatProviderKind kind() const override { return inner_.kind(); }
  std::string model_id() const override { return inner_.model_id(); }
  std::string complete(const ChatRequest& request) const override;

  std::vector<RecordedExchange> exchanges() const;
  void save(const std::filesystem::path& path) const;

 private:
  const ChatProvider& inner_;
  mutable std::mutex mutex_;
  mutable std::vector<RecordedExchange> recorded_;
};

// Deterministic offline stand-in for a chat model, driven by request.context.
// Lets the whole workflow run headless without network access.
class MockChatProvider final : public ChatProvider {
 public:
  ChatProviderKind kind() const override { return ChatProviderKind::offline_mock; }
  std::string model_id() const override { return "offline-mock"; }
  std::string complete(const ChatRequest& request) const override;
};

nlohmann::json fixture_to_json(const std::string& model_id, const std::vector<RecordedExchange>& exchanges);

}  // namespace workbench
