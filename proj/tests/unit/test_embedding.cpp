#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "workbench/embedding.hpp"
#include "workbench/errors.hpp"
#include "workbench/image.hpp"
#include "workbench/util.hpp"

using namespace workbench;
using testsupport::vec;

TEST_SUITE("embedding") {
  TEST_CASE("cosine similarity basics") {
    const std::vector<double> x{1, 0}, y{0, 1}, a{3, 4}, b{6, 8};
    CHECK(cosine_similarity(x, x) == doctest::Approx(1.0));
    CHECK(cosine_similarity(x, y) == doctest::Approx(0.0));
    CHECK(cosine_similarity(a, b) == doctest::Approx(1.0));
    const std::vector<double> z{0, 0}, three{1, 2, 3};
    CHECK_THROWS_AS(cosine_similarity(x, z), DomainError);
    CHECK_THROWS_AS(cosine_similarity(x, three), ContractViolation);
  }

  TEST_CASE("cosine is symmetric and bounded") {
    SplitMix64 rng(7);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> a(16), b(16);
      for (auto& v : a) v = rng.normal();
      for (auto& v : b) v = rng.normal();
      const double ab = cosine_similarity(a, b);
      CHECK(ab == cosine_similarity(b, a));
      CHECK(ab >= -1.0);
      CHECK(ab <= 1.0);
    }
  }

  TEST_CASE("normalize and validate") {
    auto v = vec({3, 4});
    normalize(v);
    CHECK(v.normalized);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK_NOTHROW(v.validate());
    auto zero = vec({0, 0});
    CHECK_THROWS_AS(normalize(zero), DomainError);
    CHECK_THROWS_AS(vec({1.0}).validate(), ContractViolation);
    CHECK_THROWS_AS(vec({1.0, NAN}).validate(), ContractViolation);
    auto off = vec({1.0, 1.0});
    off.normalized = true;
    CHECK_THROWS_AS(off.validate(), ContractViolation);
  }

  TEST_CASE("stub text embeddings are deterministic and unit length") {
    StubEmbeddingProvider stub;
    CHECK(stub.id() == "stub-64-0");
    const auto a = stub.embed_text("impressionism");
    const auto b = stub.embed_text("impressionism");
    CHECK(a == b);
    CHECK(a.dimension() == 64);
    CHECK(a.modality == Modality::text);
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(StubEmbeddingProvider(64, 1).embed_text("impressionism") != a);
    CHECK(StubEmbeddingProvider(128).embed_text("x y").dimension() == 128);
  }

  TEST_CASE("stub text embeddings place related phrases closer than noise") {
    StubEmbeddingProvider stub;
    const auto base = stub.embed_text("impressionism");
    const double related = cosine_similarity(base, stub.embed_text("impressionist painting"));
    SplitMix64 rng(2023);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ";
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
      std::string noise;
      for (int c = 0; c < 40; ++c) noise += alphabet[rng.next() % alphabet.size()];
      if (related > cosine_similarity(base, stub.embed_text(noise))) ++wins;
    }
    CHECK(wins >= 95);
  }

  TEST_CASE("empty text is an input error") {
    StubEmbeddingProvider stub;
    CHECK_THROWS_AS(stub.embed_text(""), InputError);
    CHECK_THROWS_AS(stub.embed_text("   "), InputError);
    const std::vector<std::string> batch{"fine", ""};
    CHECK_THROWS_AS(stub.embed_texts(batch), InputError);
  }

  TEST_CASE("batch and single embedding agree") {
    StubEmbeddingProvider stub;
    const std::vector<std::string> texts{"a cat", "oil paint", "4k"};
    const auto batch = stub.embed_texts(texts);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(batch[i] == stub.embed_text(texts[i]));
  }

  TEST_CASE("stub image embeddings") {
    StubEmbeddingProvider stub;
    const auto black = encode_png(solid_image(512, 512, 0, 0, 0));
    const auto white = encode_png(solid_image(512, 512, 255, 255, 255));
    const auto b1 = stub.embed_image(black);
    const auto b2 = stub.embed_image(black);
    CHECK(b1 == b2);
    CHECK(b1.modality == Modality::image);
    CHECK(cosine_similarity(b1, stub.embed_image(white)) < 1.0);
    const std::vector<std::uint8_t> junk{1, 2, 3, 4};
    CHECK_THROWS_AS(stub.embed_image(junk), InputError);
  }

  TEST_CASE("stub captions") {
    StubCaptionProvider cap;
    const auto png = encode_png(solid_image(8, 8, 10, 20, 30));
    const auto c1 = cap.caption(png);
    CHECK(c1.rfind("image ", 0) == 0);
    CHECK(c1.size() == 14);
    CHECK(cap.caption(png) == c1);
    CHECK(cap.caption(encode_png(solid_image(8, 8, 11, 20, 30))) != c1);
    const std::vector<std::uint8_t> junk{0, 1};
    CHECK_THROWS_AS(cap.caption(junk), InputError);
  }

  TEST_CASE("modality names round trip") {
    CHECK(modality_from_string(to_string(Modality::image)) == Modality::image);
    CHECK(modality_from_string(to_string(Modality::text)) == Modality::text);
  }
}
