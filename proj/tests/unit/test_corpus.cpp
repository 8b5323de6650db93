#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "support.hpp"
#include "workbench/corpus.hpp"
#include "workbench/errors.hpp"
#include "workbench/util.hpp"

using namespace workbench;
using namespace testsupport;

namespace {

std::string segments_text(std::size_t n) {
  std::string s = "a lighthouse";
  for (std::size_t i = 1; i < n; ++i) s += ", mod" + std::to_string(i);
  return s;
}

// Random unit vectors under a permissive filter, for retrieval tests.
FilteredCorpus random_corpus(std::size_t n, std::size_t dim, std::uint64_t seed,
                             std::vector<EmbeddingVector>* vectors = nullptr) {
  SplitMix64 rng(seed);
  std::vector<PromptRecord> records;
  std::vector<double> matrix;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "r%05zu", i);
    records.push_back(PromptRecord::from_text(id, "text " + std::to_string(i), 0.0));
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    v = unit(v);
    matrix.insert(matrix.end(), v.begin(), v.end());
    if (vectors) vectors->push_back(vec(v, Modality::text));
  }
  return FilteredCorpus(std::move(records), FilterConfig{1.0, 0}, "random", dim, std::move(matrix));
}

class FailingAfter final : public EmbeddingProvider {
 public:
  explicit FailingAfter(int ok_calls) : ok_(ok_calls) {}
  std::string id() const override { return "failing"; }
  std::size_t dimension() const override { return 8; }
  ProviderKind kind() const override { return ProviderKind::remote_http; }

 protected:
  std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) const override {
    if (calls_++ >= ok_) throw ProviderError("endpoint down", 3, true);
    return std::vector<std::vector<double>>(texts.size(), std::vector<double>(8, 1.0));
  }
  std::vector<std::vector<double>> raw_images(std::span<const std::vector<std::uint8_t>>) const override {
    throw ProviderError("no images");
  }

 private:
  int ok_;
  mutable int calls_ = 0;
};

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("comma split") {
    CHECK(split_segments("a cat, oil paint, 4k") == std::vector<std::string>{"a cat", "oil paint", "4k"});
    CHECK(split_segments("a cat,, 4k ,") == std::vector<std::string>{"a cat", "4k"});
    CHECK(split_segments("").empty());
    CHECK(split_segments("one,\ntwo") == std::vector<std::string>{"one", "two"});
  }

  TEST_CASE("filter thresholds") {
    const FilterConfig f;
    CHECK_FALSE(passes_filter(PromptRecord::from_text("a", segments_text(8), 0.2), f));
    CHECK_FALSE(passes_filter(PromptRecord::from_text("b", segments_text(5), 0.05), f));
    CHECK(passes_filter(PromptRecord::from_text("c", segments_text(6), 0.05), f));
    CHECK(passes_filter(PromptRecord::from_text("d", segments_text(6), 0.1), f));
    CHECK_FALSE(passes_filter(PromptRecord::from_text("e", segments_text(6), 0.1000001), f));
  }

  TEST_CASE("jsonl reader counts malformed lines") {
    std::istringstream in(
        "{\"id\":\"x1\",\"text\":\"a, b\",\"nsfw_score\":0.01}\n"
        "\n"
        "not json\n"
        "{\"id\":\"x2\",\"text\":\"a\"}\n"
        "{\"id\":7,\"text\":\"c\",\"nsfw_score\":0}\n");
    const auto parsed = read_prompt_jsonl(in);
    CHECK(parsed.malformed == 2);
    REQUIRE(parsed.records.size() == 2);
    CHECK(parsed.records[0].segments == std::vector<std::string>{"a", "b"});
    CHECK(parsed.records[1].id == "7");
  }

  TEST_CASE("ingest survivors equal the independent filter oracle") {
    SplitMix64 rng(99);
    std::vector<std::string> lines;
    std::vector<PromptRecord> records;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t segs = 1 + rng.next() % 10;
      const double nsfw = rng.uniform() < 0.5 ? 0.1 * rng.uniform() : rng.uniform();
      nlohmann::json j{{"id", "q" + std::to_string(i)}, {"text", segments_text(segs)}, {"nsfw_score", nsfw}};
      lines.push_back(j.dump());
    }
    std::istringstream in([&] {
      std::string all;
      for (const auto& l : lines) all += l + "\n";
      return all;
    }());
    const auto parsed = read_prompt_jsonl(in);
    StubEmbeddingProvider stub;
    const auto report = ingest(parsed.records, stub);
    std::vector<std::string> got;
    for (const auto& r : report.corpus.records()) got.push_back(r.id);
    CHECK(got == oracle_filter_ids(lines, 0.1, 6));
    CHECK(report.input_count == 1000);
    CHECK(report.survivors == got.size());
  }

  TEST_CASE("ingest skips malformed and already-embedded records") {
    CountingEmbeddingProvider counting;
    std::vector<PromptRecord> records{PromptRecord::from_text("a", segments_text(6), 0.0),
                                      PromptRecord::from_text("", segments_text(6), 0.0),
                                      PromptRecord::from_text("c", segments_text(7), 1.5)};
    const auto first = ingest(records, counting);
    CHECK(first.malformed == 2);
    CHECK(counting.calls() == 1);
    const auto again = ingest(first.corpus.records_with_embeddings(), counting);
    CHECK(counting.calls() == 1);
    CHECK(again.corpus == first.corpus);
  }

  TEST_CASE("provider failure mid-ingest reports progress") {
    std::vector<PromptRecord> records;
    for (int i = 0; i < 300; ++i) records.push_back(PromptRecord::from_text("p" + std::to_string(i), segments_text(6), 0));
    FailingAfter provider(1);
    try {
      ingest(records, provider);
      FAIL("expected IngestError");
    } catch (const IngestError& e) {
      CHECK(e.total() == 300);
      CHECK(e.embedded() > 0);
      CHECK(e.embedded() < 300);
    }
  }

  TEST_CASE("knn: stored embedding ranks itself first") {
    const auto corpus = random_corpus(50, 16, 5);
    const auto q = corpus.embedding_of(17);
    const auto hits = corpus.knn(q, 10);
    REQUIRE(hits.size() == 10);
    CHECK(hits[0].id == "r00017");
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("knn matches the exhaustive oracle on 10k random vectors") {
    std::vector<EmbeddingVector> vectors;
    const auto corpus = random_corpus(10000, 32, 11, &vectors);
    std::vector<std::string> ids;
    for (const auto& r : corpus.records()) ids.push_back(r.id);
    SplitMix64 rng(12);
    for (int q = 0; q < 5; ++q) {
      std::vector<double> v(32);
      for (auto& x : v) x = rng.normal();
      const auto query = vec(v, Modality::text);
      const auto hits = corpus.knn(query, 10);
      const auto oracle = oracle_knn(ids, vectors, query, 10);
      REQUIRE(hits.size() == oracle.size());
      for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i].id == oracle[i].id);
        CHECK(hits[i].similarity == doctest::Approx(oracle[i].score).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("knn clamps k, ties break by id, and checks dimensions") {
    const auto small = random_corpus(2, 8, 3);
    CHECK(small.knn(small.embedding_of(0), 3).size() == 2);
    CHECK(FilteredCorpus().knn(vec({1, 0}), 10).empty());
    CHECK_THROWS_AS(small.knn(vec({1, 0}), 2), ContractViolation);
    CHECK_THROWS_AS(small.knn(small.embedding_of(0), 0), ContractViolation);

    std::vector<double> row = unit(std::vector<double>{1, 2, 3});
    std::vector<double> matrix;
    std::vector<PromptRecord> recs;
    for (const char* id : {"c", "a", "b"}) {
      recs.push_back(PromptRecord::from_text(id, "t", 0));
      matrix.insert(matrix.end(), row.begin(), row.end());
    }
    const FilteredCorpus tied(recs, FilterConfig{1.0, 0}, "t", 3, matrix);
    const auto hits = tied.knn(vec({1, 2, 3}), 3);
    CHECK(hits[0].id == "a");
    CHECK(hits[1].id == "b");
    CHECK(hits[2].id == "c");
  }

  TEST_CASE("corpus rejects records that fail its own filter") {
    std::vector<PromptRecord> recs{PromptRecord::from_text("x", "short", 0)};
    CHECK_THROWS_AS(FilteredCorpus(recs, FilterConfig{}, "p", 2, {1.0, 0.0}), ContractViolation);
  }

  TEST_CASE("save and load round trip") {
    TempDir dir;
    std::vector<PromptRecord> records;
    for (int i = 0; i < 100; ++i) {
      records.push_back(PromptRecord::from_text("k" + std::to_string(i), segments_text(6 + i % 3), 0.01 * (i % 10)));
    }
    StubEmbeddingProvider stub;
    const auto corpus = ingest(records, stub).corpus;
    REQUIRE(corpus.size() == 100);
    save_corpus(corpus, dir / "c.jsonl");
    CHECK(fs::exists(dir / "c.vec"));
    const auto loaded = load_corpus(dir / "c.jsonl", stub.id());
    CHECK(loaded.corpus == corpus);
    CHECK(loaded.warnings.empty());

    const auto other = load_corpus(dir / "c.jsonl", "some-other-provider");
    CHECK(other.corpus == corpus);
    CHECK(other.warnings.size() == 1);
  }

  TEST_CASE("truncated or mismatched corpus files are refused") {
    TempDir dir;
    const auto corpus = random_corpus(20, 8, 4);
    save_corpus(corpus, dir / "c.jsonl");
    const std::string text = read_text_file(dir / "c.jsonl");

    SUBCASE("records cut short") {
      write_file_atomic(dir / "c.jsonl", text.substr(0, text.size() / 2));
      CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), FormatError);
    }
    SUBCASE("vector sidecar cut short") {
      auto blob = read_binary_file(dir / "c.vec");
      blob.resize(blob.size() - 8);
      write_file_atomic(dir / "c.vec", std::span<const std::uint8_t>(blob));
      CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), FormatError);
    }
    SUBCASE("vector bytes altered") {
      auto blob = read_binary_file(dir / "c.vec");
      blob.back() ^= 0x01;
      write_file_atomic(dir / "c.vec", std::span<const std::uint8_t>(blob));
      CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), FormatError);
    }
    SUBCASE("future version") {
      const auto nl = text.find('\n');
      auto header = nlohmann::json::parse(text.substr(0, nl));
      header["version"] = kCorpusFormatVersion + 1;
      write_file_atomic(dir / "c.jsonl", header.dump() + text.substr(nl));
      CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), VersionError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_corpus(dir / "nope.jsonl"), FormatError); }
  }
}
