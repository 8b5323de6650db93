#include <doctest.h>

#include <set>
#include <sstream>

#include "support.hpp"
#include "workbench/errors.hpp"
#include "workbench/image.hpp"
#include "workbench/modifiers.hpp"
#include "workbench/suggestion.hpp"
#include "workbench/util.hpp"

using namespace workbench;
using namespace testsupport;

namespace {

EmbeddingVector basis(std::size_t dim, std::vector<std::pair<std::size_t, double>> parts,
                      Modality m = Modality::image) {
  std::vector<double> v(dim, 0.0);
  for (auto [i, w] : parts) v[i] += w;
  return vec(v, m);
}

// Eight modifiers, one per axis of an 8-D space.
ModifierCorpus axis_corpus() {
  std::vector<ModifierEntry> entries;
  std::vector<EmbeddingVector> vectors;
  for (std::size_t i = 0; i < 8; ++i) {
    entries.push_back({"m" + std::to_string(i), i % 2 ? ModifierCategory::artist : ModifierCategory::phrase});
    vectors.push_back(basis(8, {{i, 1.0}}, Modality::text));
  }
  return ModifierCorpus(entries, vectors);
}

CanvasLayout layout_for(std::vector<std::size_t> cluster_of, std::size_t clusters) {
  CanvasLayout l;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    l.image_ids.push_back("img" + std::to_string(i));
    l.base_positions.push_back({128.0 * static_cast<double>(i), 0});
  }
  l.positions = l.base_positions;
  l.cluster_of = cluster_of;
  for (std::size_t k = 0; k < clusters; ++k) l.clusters.push_back({k, {}, "", k});
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    auto& c = l.clusters[cluster_of[i]];
    if (c.member_ids.empty()) c.exemplar_id = l.image_ids[i];
    c.member_ids.push_back(l.image_ids[i]);
  }
  return l;
}

std::vector<std::string> phrases_of(const std::vector<ScoredModifier>& list) {
  std::vector<std::string> out;
  for (const auto& m : list) out.push_back(m.phrase);
  return out;
}

}  // namespace

TEST_SUITE("modifiers") {
  TEST_CASE("tsv reading") {
    std::istringstream in("# header\n\nsoft lighting\tphrase\nHayao Miyazaki\tArtist\nbroken line\nx\tcolour\n");
    const auto tsv = read_modifier_tsv(in);
    REQUIRE(tsv.entries.size() == 2);
    CHECK(tsv.entries[1] == ModifierEntry{"Hayao Miyazaki", ModifierCategory::artist});
    CHECK(tsv.malformed == 2);
  }

  TEST_CASE("bundled modifier list loads without duplicates") {
    StubEmbeddingProvider stub;
    const auto corpus = ModifierCorpus::load(default_data_dir() / "modifiers.tsv", stub);
    CHECK(corpus.size() == 2200);
    CHECK(corpus.contains("Hayao Miyazaki"));
    CHECK(corpus.provider_id() == stub.id());
    std::set<std::string> lower;
    for (const auto& e : corpus.entries()) lower.insert(to_lower(e.phrase));
    CHECK(lower.size() == corpus.size());
  }

  TEST_CASE("case-insensitive duplicates keep the first spelling") {
    StubEmbeddingProvider stub;
    const ModifierCorpus c({{"Soft Lighting", ModifierCategory::phrase}, {"soft lighting", ModifierCategory::phrase}},
                           stub);
    CHECK(c.size() == 1);
    CHECK(c.entries()[0].phrase == "Soft Lighting");
  }

  TEST_CASE("an entry equal to the image embedding ranks first at 1.0") {
    const std::vector<ModifierEntry> entries{{"A", ModifierCategory::phrase},
                                             {"B", ModifierCategory::phrase},
                                             {"C", ModifierCategory::artist}};
    const std::vector<EmbeddingVector> vectors{vec({1, 0, 0}, Modality::text), vec({0.3, 0.5, 0.2}, Modality::text),
                                               vec({0, 0, 1}, Modality::text)};
    const ModifierCorpus corpus(entries, vectors);
    const auto ranked = score_modifiers(corpus, vec({0.3, 0.5, 0.2}));
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].phrase == "B");
    CHECK(ranked[0].score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ranked[0].score <= 1.0);
  }

  TEST_CASE("ranking over a 1k stub corpus equals the brute-force oracle") {
    StubEmbeddingProvider stub;
    std::vector<ModifierEntry> entries;
    std::vector<std::string> phrases;
    for (int i = 0; i < 1000; ++i) {
      phrases.push_back("modifier " + std::to_string(i) + (i % 3 ? " light" : " shadow"));
      entries.push_back({phrases.back(), ModifierCategory::phrase});
    }
    const ModifierCorpus corpus(entries, stub);
    const auto phrase_vectors = stub.embed_texts(phrases);
    SplitMix64 rng(6);
    std::vector<double> q(64);
    for (auto& x : q) x = rng.normal();
    const auto image = vec(q);
    const auto ranked = score_modifiers(corpus, image, 1000);
    const auto oracle = oracle_mean_rank(phrases, phrase_vectors, {image}, 1000);
    REQUIRE(ranked.size() == oracle.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      CHECK(ranked[i].phrase == oracle[i].phrase);
      CHECK(ranked[i].score == doctest::Approx(oracle[i].score).epsilon(1e-12));
    }
    CHECK(score_modifiers(corpus, image, 0).empty());
    CHECK(score_modifiers(corpus, image).size() == kDefaultMenuSize);
  }

  TEST_CASE("scoring contracts") {
    const auto corpus = axis_corpus();
    CHECK_THROWS_AS(score_modifiers(corpus, basis(8, {{0, 1}}, Modality::text)), ContractViolation);
    CHECK_THROWS_AS(score_modifiers(corpus, vec({1, 0, 0})), ContractViolation);
    CHECK_THROWS_AS(aggregate_cluster(corpus, std::span<const EmbeddingVector>{}), ContractViolation);
  }

  TEST_CASE("aggregation is the member mean") {
    const auto corpus = axis_corpus();
    const auto one = basis(8, {{0, 1}, {1, 0.5}});
    const std::vector<EmbeddingVector> single{one};
    CHECK(aggregate_cluster(corpus, single) == score_modifiers(corpus, one));
    const std::vector<EmbeddingVector> twins{one, one};
    CHECK(aggregate_cluster(corpus, twins) == score_modifiers(corpus, one));

    SplitMix64 rng(9);
    std::vector<EmbeddingVector> members;
    for (int m = 0; m < 3; ++m) {
      std::vector<double> v(8);
      for (auto& x : v) x = rng.normal();
      members.push_back(vec(v));
    }
    std::vector<std::string> names;
    std::vector<EmbeddingVector> axis;
    for (std::size_t i = 0; i < 8; ++i) {
      names.push_back("m" + std::to_string(i));
      axis.push_back(basis(8, {{i, 1.0}}, Modality::text));
    }
    const auto got = aggregate_cluster(corpus, members, 8);
    const auto want = oracle_mean_rank(names, axis, members, 8);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(got[i].phrase == want[i].phrase);
      CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
    }
  }

  TEST_CASE("single-cluster layout: unique equals aggregated") {
    const auto corpus = axis_corpus();
    const auto layout = layout_for({0, 0, 0}, 1);
    const std::vector<EmbeddingVector> emb{basis(8, {{0, 1}}), basis(8, {{1, 1}}), basis(8, {{0, 1}, {2, 1}})};
    const auto menus = cluster_menus(layout, emb, corpus, 4);
    REQUIRE(menus.aggregated.size() == 1);
    CHECK(menus.unique[0] == menus.aggregated[0]);
  }

  TEST_CASE("engineered disjoint clusters both have unique modifiers") {
    const auto corpus = axis_corpus();
    const auto layout = layout_for({0, 0, 1, 1}, 2);
    const std::vector<EmbeddingVector> emb{basis(8, {{0, 1}, {1, 0.5}}), basis(8, {{0, 1}, {1, 0.4}}),
                                           basis(8, {{4, 1}, {5, 0.5}}), basis(8, {{4, 1}, {5, 0.4}})};
    const auto menus = cluster_menus(layout, emb, corpus, 2);
    CHECK(phrases_of(menus.aggregated[0]) == std::vector<std::string>{"m0", "m1"});
    CHECK(phrases_of(menus.aggregated[1]) == std::vector<std::string>{"m4", "m5"});
    CHECK(phrases_of(menus.unique[0]) == std::vector<std::string>{"m0", "m1"});
    CHECK(phrases_of(menus.unique[1]) == std::vector<std::string>{"m4", "m5"});
  }

  TEST_CASE("unique sets are disjoint subsets of their cluster sets") {
    StubEmbeddingProvider stub;
    const auto corpus = ModifierCorpus::load(default_data_dir() / "modifiers.tsv", stub);
    SplitMix64 rng(44);
    for (int t = 0; t < 10; ++t) {
      const std::size_t n = 4 + rng.next() % 12, k = 1 + rng.next() % 4;
      std::vector<std::size_t> cluster_of(n);
      for (std::size_t i = 0; i < n; ++i) cluster_of[i] = i < k ? i : rng.next() % k;
      std::vector<EmbeddingVector> emb;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(64);
        for (auto& x : v) x = rng.normal();
        emb.push_back(vec(v));
      }
      const auto menus = cluster_menus(layout_for(cluster_of, k), emb, corpus, 15);
      for (std::size_t a = 0; a < k; ++a) {
        const auto agg = phrases_of(menus.aggregated[a]);
        for (const auto& u : phrases_of(menus.unique[a])) {
          CHECK(std::find(agg.begin(), agg.end(), u) != agg.end());
          for (std::size_t b = 0; b < k; ++b) {
            if (b == a) continue;
            const auto other = phrases_of(menus.unique[b]);
            CHECK(std::find(other.begin(), other.end(), u) == other.end());
          }
        }
      }
    }
  }

  TEST_CASE("image menu") {
    const auto corpus = axis_corpus();
    StubCaptionProvider captioner;
    const auto png = encode_png(solid_image(4, 4, 1, 2, 3));

    SUBCASE("one-image layout derives every list from that image") {
      const auto layout = layout_for({0}, 1);
      const std::vector<EmbeddingVector> emb{basis(8, {{3, 1}, {6, 0.2}})};
      const auto menu = image_menu("img0", layout, emb, corpus, captioner, png, 3);
      CHECK(menu.image_modifiers == score_modifiers(corpus, emb[0], 3));
      CHECK(menu.cluster_modifiers == menu.image_modifiers);
      CHECK(menu.cluster_unique_modifiers == menu.image_modifiers);
      CHECK(menu.caption == captioner.caption(png));
      const auto j = menu_to_json(menu);
      CHECK(j["image_modifiers"][0]["phrase"] == "m3");
      CHECK(j["image_modifiers"][0]["category"] == "artist");
    }
    SUBCASE("unknown image") {
      const auto layout = layout_for({0}, 1);
      const std::vector<EmbeddingVector> emb{basis(8, {{3, 1}})};
      CHECK_THROWS_AS(image_menu("img9", layout, emb, corpus, captioner, png), LookupError);
    }
    SUBCASE("no pixels, no caption") {
      const auto layout = layout_for({0}, 1);
      const std::vector<EmbeddingVector> emb{basis(8, {{3, 1}})};
      CHECK(image_menu("img0", layout, emb, corpus, captioner, {}).caption.empty());
    }
  }
}
