#include "support.hpp"

#include <httplib.h>
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <random>
#include <stdexcept>

#include "workbench/errors.hpp"
#include "workbench/suggestion.hpp"
#include "workbench/util.hpp"

namespace testsupport {

using namespace workbench;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto candidate = base / ("wbtest-" + to_hex((static_cast<std::uint64_t>(rd()) << 32) ^ rd()) + "-" +
                                   std::to_string(counter++));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create a temp directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path source_dir() { return fs::path(WORKBENCH_SOURCE_DIR); }

fs::path fixture_path(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }

std::vector<std::vector<double>> CountingEmbeddingProvider::raw_texts(std::span<const std::string> texts) const {
  ++calls_;
  std::vector<std::vector<double>> out;
  for (const auto& v : inner_.embed_texts(texts)) out.push_back(v.values);
  return out;
}

std::vector<std::vector<double>> CountingEmbeddingProvider::raw_images(
    std::span<const std::vector<std::uint8_t>> images) const {
  ++calls_;
  for (const auto& img : images) {
    if (poison_size_ != 0 && img.size() == poison_size_) throw ProviderError("poisoned image");
  }
  std::vector<std::vector<double>> out;
  for (const auto& v : inner_.embed_images(images)) out.push_back(v.values);
  return out;
}

FixtureServer::FixtureServer() : server_(std::make_unique<httplib::Server>()) {}

FixtureServer::~FixtureServer() {
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

void FixtureServer::post(const std::string& pattern, Handler handler) { server_->Post(pattern, std::move(handler)); }

void FixtureServer::get(const std::string& pattern, Handler handler) { server_->Get(pattern, std::move(handler)); }

httplib::Server& FixtureServer::raw() { return *server_; }

void FixtureServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("fixture server could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string FixtureServer::url(const std::string& path) const {
  return "http://127.0.0.1:" + std::to_string(port_) + path;
}

int closed_port() {
  // Bind without listening, read the port, close. Connects then get refused.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    ::close(fd);
    throw std::runtime_error("bind() failed");
  }
  ::close(fd);
  return ntohs(addr.sin_port);
}

EmbeddingVector vec(std::vector<double> values, Modality m, std::string provider) {
  EmbeddingVector v;
  v.values = std::move(values);
  v.modality = m;
  v.provider_id = std::move(provider);
  return v;
}

// ---------------------------------------------------------------------------

const char* const kLionSuggestion =
    "Lion standing on a rocky outcrop overlooking a vast desert landscape with a setting sun in the background.";
const char* const kJapanSuggestion =
    "Lion standing majestically by a cherry blossom tree with Mount Fuji in the background.";
const char* const kIdeationResponse =
    "1. Lion standing on a rocky outcrop overlooking a vast desert landscape with a setting sun in the "
    "background.\n"
    "2. Lion cub playing with a butterfly in a field of tall golden grass.\n"
    "3. Lion resting under an acacia tree while a herd of zebras grazes nearby.";
const char* const kSteerResponse =
    "1. Lion standing majestically by a cherry blossom tree with Mount Fuji in the background.\n"
    "2. Lion walking through a torii gate path lined with glowing stone lanterns.\n"
    "3. Lion sitting beside a koi pond in a quiet Kyoto temple garden.";
const char* const kGhibliCompletion =
    "{studio ghibli style, soft lighting, pastel colors, anime-inspired, intricate details, in the style of "
    "Hayao Miyazaki and Isao Takahata, breathtaking scenery, trending on artstation}";
const std::vector<std::string> kGhibliModifiers = {"studio ghibli style",
                                                   "soft lighting",
                                                   "pastel colors",
                                                   "anime-inspired",
                                                   "intricate details",
                                                   "in the style of Hayao Miyazaki and Isao Takahata",
                                                   "breathtaking scenery",
                                                   "trending on artstation"};
const char* const kCowPrompt = "a brown cow";
const char* const kCowModifier = "a cow with a red barn in the background";
const char* const kCowIntegrated = "a brown cow with a red barn in the background";
const char* const kSteerInstruction = "change the setting to Japan";
const char* const kTwoItemSubject = "Tiger";
const char* const kTwoItemResponse =
    "1. Tiger prowling through a misty bamboo forest.\n2. Tiger swimming across a jungle river.";

ScriptedChatProvider::Script worked_script() {
  return [](const ChatRequest& r) -> std::string {
    if (r.task == "ideate") {
      const auto it = r.context.find("subject");
      if (it != r.context.end() && it->second == kTwoItemSubject) return kTwoItemResponse;
      return kIdeationResponse;
    }
    if (r.task == "steer") return kSteerResponse;
    if (r.task == "style") return kGhibliCompletion;
    if (r.task == "integrate") return kCowIntegrated;
    throw std::runtime_error("unscripted task " + r.task);
  };
}

const FilteredCorpus& sample_corpus() {
  static const FilteredCorpus corpus = [] {
    std::ifstream in(default_data_dir() / "prompts_sample.jsonl");
    if (!in) throw std::runtime_error("sample prompts missing");
    const auto parsed = read_prompt_jsonl(in);
    StubEmbeddingProvider stub;
    return ingest(parsed.records, stub).corpus;
  }();
  return corpus;
}

// ---------------------------------------------------------------------------

std::vector<std::string> oracle_filter_ids(const std::vector<std::string>& jsonl_lines, double threshold,
                                           std::size_t min_segments) {
  std::vector<std::string> ids;
  for (const auto& line : jsonl_lines) {
    const auto j = nlohmann::json::parse(line);
    std::size_t segments = 0;
    std::string current;
    const std::string text = j["text"].get<std::string>() + ",";
    for (char c : text) {
      if (c == ',') {
        if (current.find_first_not_of(" \t\r\n") != std::string::npos) ++segments;
        current.clear();
      } else {
        current += c;
      }
    }
    if (j["nsfw_score"].get<double>() <= threshold && segments >= min_segments) {
      ids.push_back(j["id"].get<std::string>());
    }
  }
  return ids;
}

std::vector<OracleHit> oracle_knn(const std::vector<std::string>& ids, const std::vector<EmbeddingVector>& vectors,
                                  const EmbeddingVector& query, std::size_t k) {
  std::vector<OracleHit> all;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t d = 0; d < query.values.size(); ++d) {
      dot += vectors[i].values[d] * query.values[d];
      na += vectors[i].values[d] * vectors[i].values[d];
      nb += query.values[d] * query.values[d];
    }
    all.push_back({ids[i], dot / std::sqrt(na * nb)});
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    const auto ka = std::llround(a.score * 1e12), kb = std::llround(b.score * 1e12);
    if (ka != kb) return ka > kb;
    return a.id < b.id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

ExhaustiveClustering exhaustive_exemplars(const std::vector<double>& s, std::size_t n, double preference) {
  ExhaustiveClustering best;
  best.best_net = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    double net = 0.0;
    std::vector<std::size_t> assign(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        net += preference;
        assign[i] = i;
        continue;
      }
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < n; ++e) {
        if ((mask & (1u << e)) && s[i * n + e] > top) {
          top = s[i * n + e];
          assign[i] = e;
        }
      }
      net += top;
    }
    if (net > best.best_net) {
      best.best_net = net;
      best.best_exemplar_of = assign;
    }
  }
  return best;
}

std::vector<std::size_t> canonical_partition(const std::vector<std::size_t>& group_of) {
  std::vector<std::size_t> out(group_of.size());
  for (std::size_t i = 0; i < group_of.size(); ++i) {
    std::size_t first = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (group_of[j] == group_of[i]) {
        first = j;
        break;
      }
    }
    out[i] = first;
  }
  return out;
}

double neighbor_preservation(const std::vector<Point2>& points, const std::vector<int>& labels) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t nearest = i;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      const double d = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    if (labels[nearest] == labels[i]) ++same;
  }
  return points.empty() ? 0.0 : static_cast<double>(same) / static_cast<double>(points.size());
}

std::vector<OracleScore> oracle_mean_rank(const std::vector<std::string>& phrases,
                                          const std::vector<EmbeddingVector>& phrase_vectors,
                                          const std::vector<EmbeddingVector>& members, std::size_t top_n) {
  std::vector<OracleScore> all;
  for (std::size_t p = 0; p < phrases.size(); ++p) {
    double sum = 0.0;
    for (const auto& m : members) sum += cosine_similarity(phrase_vectors[p], m);
    all.push_back({phrases[p], sum / static_cast<double>(members.size())});
  }
  std::stable_sort(all.begin(), all.end(), [](const OracleScore& a, const OracleScore& b) {
    const auto ka = std::llround(a.score * 1e12), kb = std::llround(b.score * 1e12);
    if (ka != kb) return ka > kb;
    return a.phrase < b.phrase;
  });
  all.resize(std::min(top_n, all.size()));
  return all;
}

Blobs gaussian_blobs(std::size_t blobs, std::size_t per_blob, std::size_t dim, double spread, double separation,
                     std::uint64_t seed) {
  // Centers sit on scaled basis vectors so every pair is exactly `separation`
  // apart. `spread` is the RMS distance of a point from its center.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, spread / std::sqrt(static_cast<double>(dim)));
  Blobs out;
  for (std::size_t b = 0; b < blobs; ++b) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = normal(rng);
      v[b % dim] += separation / std::sqrt(2.0);
      out.vectors.push_back(vec(std::move(v), Modality::image, "blobs"));
      out.labels.push_back(static_cast<int>(b));
    }
  }
  return out;
}

}  // namespace testsupport
