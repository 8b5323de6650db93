#include "workbench/chat.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "workbench/corpus.hpp"
#include "workbench/errors.hpp"
#include "workbench/util.hpp"

namespace workbench {

namespace {

constexpr int kFixtureVersion = 1;

constexpr std::array<std::string_view, 12> kScenes = {
    "standing on a windswept cliff above a stormy sea",
    "resting in a sunlit meadow full of wildflowers",
    "walking through a misty pine forest at dawn",
    "perched on an ancient stone bridge in the rain",
    "wandering a neon-lit city street at night",
    "surrounded by floating lanterns on a calm lake",
    "silhouetted against a blazing orange sunset in the desert",
    "curled up beside a crackling fireplace in a cozy cabin",
    "crossing a frozen tundra under the northern lights",
    "exploring overgrown temple ruins in the jungle",
    "sitting on a rooftop garden overlooking a busy harbor",
    "drifting through a field of clouds at golden hour",
};

constexpr std::array<std::string_view, 6> kFallbackModifiers = {
    "highly detailed", "soft lighting", "sharp focus", "vibrant colors", "concept art", "trending on artstation",
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string strip_trailing_period(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string context_value(const ChatRequest& r, const std::string& key) {
  const auto it = r.context.find(key);
  return it == r.context.end() ? std::string() : it->second;
}

std::string mock_subjects(const std::string& subject, const std::string& salt, const std::string& suffix) {
  const std::uint64_t h = fnv1a64(to_lower(subject) + "|" + salt);
  std::ostringstream out;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t pick = (h >> (i * 8)) % kScenes.size();
    while (std::find(used.begin(), used.end(), pick) != used.end()) pick = (pick + 1) % kScenes.size();
    used.push_back(pick);
    out << (i + 1) << ". " << capitalize(trim(subject)) << ' ' << kScenes[pick] << suffix << ".\n";
  }
  return out.str();
}

std::string mock_style(const ChatRequest& request) {
  const std::string style = trim(context_value(request, "style"));
  std::vector<std::pair<std::string, int>> counts;  // first spelling seen, occurrences
  for (const auto& line : split_lines(context_value(request, "examples"))) {
    const auto segments = split_segments(line);
    for (std::size_t i = 1; i < segments.size(); ++i) {
      if (iequals(segments[i], style)) continue;
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return iequals(c.first, segments[i]); });
      if (it == counts.end()) counts.emplace_back(segments[i], 1);
      else ++it->second;
    }
  }
  std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> picked;
  for (const auto& [phrase, n] : counts) {
    if (picked.size() == 6) break;
    picked.push_back(phrase);
  }
  for (auto m : kFallbackModifiers) {
    if (picked.size() >= 6) break;
    if (std::none_of(picked.begin(), picked.end(), [&](const auto& p) { return iequals(p, m); })) picked.emplace_back(m);
  }
  std::string out = style.empty() ? std::string() : style + " style";
  for (const auto& p : picked) out += (out.empty() ? "" : ", ") + p;
  return out;
}

}  // namespace

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
  return out;
}

std::vector<ChatMessage> messages_from_json(const nlohmann::json& j) {
  std::vector<ChatMessage> out;
  for (const auto& m : j) out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  return out;
}

std::string request_key(const std::string& model_id, const ChatRequest& request) {
  const nlohmann::json canonical{{"model", model_id},
                                 {"temperature", request.temperature},
                                 {"messages", messages_to_json(request.messages)}};
  return to_hex(fnv1a64(canonical.dump()));
}

std::string HttpChatProvider::complete(const ChatRequest& request) const {
  const nlohmann::json body{{"model", model_},
                            {"temperature", request.temperature},
                            {"messages", messages_to_json(request.messages)}};
  const nlohmann::json reply = post_json(endpoint_, body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("chat response missing choices[0].message.content: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

FixtureChatProvider::FixtureChatProvider(std::string model_id, std::vector<RecordedExchange> exchanges)
    : model_(std::move(model_id)) {
  for (auto& e : exchanges) {
    std::string key = e.key;
    by_key_.insert_or_assign(std::move(key), std::move(e));
  }
}

FixtureChatProvider FixtureChatProvider::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("fixture " + path.string() + " is not JSON: " + e.what());
  } catch (const InputError& e) {
    throw FormatError(e.what());
  }
  const int version = j.value("version", -1);
  if (version != kFixtureVersion) {
    throw VersionError("fixture version " + std::to_string(version) + " is not supported");
  }
  std::vector<RecordedExchange> exchanges;
  try {
    for (const auto& e : j.at("exchanges")) {
      exchanges.push_back({e.at("key").get<std::string>(), e.value("task", ""),
                           messages_from_json(e.at("messages")), e.value("temperature", 0.0),
                           e.at("response").get<std::string>()});
    }
    return FixtureChatProvider(j.at("model").get<std::string>(), std::move(exchanges));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("fixture " + path.string() + " is malformed: " + e.what());
  }
}

std::string FixtureChatProvider::complete(const ChatRequest& request) const {
  const std::string key = request_key(model_, request);
  const auto it = by_key_.find(key);
  if (it == by_key_.end()) {
    throw ProviderError("no recorded exchange for " + request.task + " request " + key);
  }
  return it->second.response;
}

nlohmann::json fixture_to_json(const std::string& model_id, const std::vector<RecordedExchange>& exchanges) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : exchanges) {
    list.push_back({{"key", e.key},
                    {"task", e.task},
                    {"temperature", e.temperature},
                    {"messages", messages_to_json(e.messages)},
                    {"response", e.response}});
  }
  return {{"version", kFixtureVersion}, {"model", model_id}, {"exchanges", list}};
}

// ---------------------------------------------------------------------------

std::string RecordingChatProvider::complete(const ChatRequest& request) const {
  std::string response = inner_.complete(request);
  std::lock_guard lock(mutex_);
  recorded_.push_back({request_key(inner_.model_id(), request), request.task, request.messages,
                       request.temperature, response});
  return response;
}

std::vector<RecordedExchange> RecordingChatProvider::exchanges() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

void RecordingChatProvider::save(const std::filesystem::path& path) const {
  write_file_atomic(path, fixture_to_json(inner_.model_id(), exchanges()).dump(2));
}

// ---------------------------------------------------------------------------

std::string MockChatProvider::complete(const ChatRequest& request) const {
  if (request.task == "ideate") {
    return mock_subjects(context_value(request, "subject"), "ideate", "");
  }
  if (request.task == "steer") {
    const std::string instruction = strip_trailing_period(trim(context_value(request, "instruction")));
    return mock_subjects(context_value(request, "subject"), instruction, ", " + to_lower(instruction));
  }
  if (request.task == "style") return mock_style(request);
  if (request.task == "integrate") {
    return context_value(request, "prompt") + ", " + context_value(request, "modifier");
  }
  throw ProviderError("offline mock has no behaviour for task '" + request.task + "'");
}

}  // namespace workbench
