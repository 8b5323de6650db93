#include <doctest.h>

#include <json.hpp>

#include "support.hpp"
#include "workbench/errors.hpp"
#include "workbench/session.hpp"
#include "workbench/util.hpp"

using namespace workbench;
using namespace testsupport;

namespace {

std::vector<GeneratedImage> batch(const std::string& prompt, int n, std::uint64_t seed, bool blocked = false) {
  static const MockImageBackend mock;
  static const StubEmbeddingProvider stub;
  GenerationRequest r;
  r.prompt = prompt;
  r.batch_size = n;
  r.seed = seed;
  r.width = r.height = 64;
  BatchOptions opts;
  if (blocked) opts.safety = substring_filter({prompt});
  auto images = generate_batch(mock, r, opts);
  embed_batch(stub, images);
  return images;
}

Session two_prompt_session() {
  Session s = create_session({std::string("s-test"), 4242});
  record_generation(s, "a lion, studio ghibli style", "", batch("a lion, studio ghibli style", 10, 1));
  record_generation(s, "a lion, cyberpunk", "blurry", batch("a lion, cyberpunk", 10, 50));
  s.suggestions = SuggestionSet{"Lion", {"a", "b", "c"}, {{"user", "q"}, {"assistant", "1. a\n2. b\n3. c"}}};
  s.styled_prompt = StyledPrompt{"a lion", {"studio ghibli style", "soft lighting"}};
  s.current_prompt = "a lion, studio ghibli style";
  s.transcripts.push_back({"ideate", "offline-mock", 0.7, {{"user", "q"}}, "1. a\n2. b\n3. c", ""});
  return s;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("create") {
    const auto a = create_session();
    const auto b = create_session();
    CHECK(a.prompt_history.empty());
    CHECK(a.id != b.id);
    CHECK(a.layout_seed <= 0xffffffffULL);
    CHECK(validate_session(a).empty());
    const auto fixed = create_session({std::string("mine"), 9});
    CHECK(fixed.id == "mine");
    CHECK(fixed.layout_seed == 9);
  }

  TEST_CASE("an empty session persists and loads") {
    TempDir dir;
    const auto s = create_session();
    save_session(s, dir.path());
    CHECK(load_session(dir.path()) == s);
    CHECK(check_session_directory(dir.path()).empty());
  }

  TEST_CASE("recording batches recomputes a global layout") {
    Session s = create_session({std::string("s"), 7});
    const auto first = record_generation(s, "a fox", "", batch("a fox", 10, 1));
    CHECK(first.prompt_id == "p0001");
    CHECK(first.image_ids.front() == "img0001");
    CHECK(first.layout.recomputed);
    REQUIRE(s.current_layout);
    CHECK(s.current_layout->size() == 10);
    CHECK(validate_session(s).empty());

    const auto second = record_generation(s, "a ship", "", batch("a ship", 10, 1));
    CHECK(second.image_ids.front() == "img0011");
    CHECK(s.current_layout->size() == 20);
    CHECK(s.layout_version == 2);
    CHECK(validate_session(s).empty());

    const auto before = *s.current_layout;
    const auto blocked = record_generation(s, "forbidden", "", batch("forbidden", 4, 1, true));
    CHECK(blocked.prompt_id == "p0003");
    CHECK_FALSE(blocked.layout.recomputed);
    CHECK(*s.current_layout == before);
    CHECK(s.prompt_history.size() == 3);
    CHECK(validate_session(s).empty());
    CHECK_THROWS_AS(record_generation(s, " ", "", {}), InputError);
  }

  TEST_CASE("failed and unembedded images stay off the canvas") {
    Session s = create_session({std::string("s"), 7});
    auto images = batch("a fox", 4, 1);
    images[0].failed = true;
    images[0].png.clear();
    images[0].embedding.reset();
    images[1].embedding.reset();
    record_generation(s, "a fox", "", images);
    CHECK(s.current_layout->size() == 2);
    CHECK(validate_session(s).empty());
  }

  TEST_CASE("visibility toggles") {
    Session s = create_session({std::string("s"), 11});
    record_generation(s, "a fox", "", batch("a fox", 6, 1));

    SUBCASE("hiding the only prompt empties the layout") {
      CHECK(toggle_prompt(s, "p0001", false).changed);
      REQUIRE(s.current_layout);
      CHECK(s.current_layout->empty());
      CHECK(validate_session(s).empty());
    }
    SUBCASE("hide then show restores the identical layout") {
      record_generation(s, "a ship", "", batch("a ship", 6, 1));
      const auto before = *s.current_layout;
      toggle_prompt(s, "p0002", false);
      CHECK(s.current_layout->size() == 6);
      CHECK(validate_session(s).empty());
      toggle_prompt(s, "p0002", true);
      CHECK(*s.current_layout == before);
      CHECK(validate_session(s).empty());
    }
    SUBCASE("toggling to the current value is a no-op") {
      const auto version = s.layout_version;
      const auto out = toggle_prompt(s, "p0001", true);
      CHECK_FALSE(out.changed);
      CHECK_FALSE(out.layout.recomputed);
      CHECK(s.layout_version == version);
    }
    SUBCASE("unknown prompt") { CHECK_THROWS_AS(toggle_prompt(s, "p0099", false), LookupError); }
  }

  TEST_CASE("save and load round trip is field-equal") {
    TempDir dir;
    const auto s = two_prompt_session();
    REQUIRE(validate_session(s).empty());
    save_session(s, dir.path());
    const auto back = load_session(dir.path());
    CHECK(back == s);
    CHECK(check_session_directory(dir.path()).empty());
    CHECK(session_from_json(session_to_json(s)).current_layout == s.current_layout);
  }

  TEST_CASE("a missing image file loads as flagged") {
    TempDir dir;
    const auto s = two_prompt_session();
    save_session(s, dir.path());
    fs::remove(dir / "images/img0003.png");
    const auto back = load_session(dir.path());
    const auto* img = back.find_image("img0003");
    REQUIRE(img);
    CHECK(img->missing);
    CHECK_FALSE(img->has_pixels());
    CHECK(back.current_layout == s.current_layout);
    CHECK(validate_session(back).empty());
  }

  TEST_CASE("future schema versions are refused") {
    TempDir dir;
    save_session(two_prompt_session(), dir.path());
    auto j = nlohmann::json::parse(read_text_file(dir / "session.json"));
    j["schema_version"] = kSessionSchemaVersion + 1;
    write_file_atomic(dir / "session.json", j.dump());
    CHECK_THROWS_AS(load_session(dir.path()), VersionError);
    CHECK_FALSE(check_session_directory(dir.path()).empty());
  }

  TEST_CASE("directory checker reports structural damage") {
    TempDir dir;
    save_session(two_prompt_session(), dir.path());
    auto j = nlohmann::json::parse(read_text_file(dir / "session.json"));
    j["prompt_history"][0].erase("prompt");
    write_file_atomic(dir / "session.json", j.dump());
    CHECK_FALSE(check_session_directory(dir.path()).empty());
  }

  TEST_CASE("validator catches inconsistent state") {
    auto s = two_prompt_session();
    SUBCASE("blocked image with pixels") {
      s.batches[0].images[0].blocked = true;
      CHECK_FALSE(validate_session(s).empty());
    }
    SUBCASE("layout missing a visible image") {
      s.current_layout->image_ids.pop_back();
      CHECK_FALSE(validate_session(s).empty());
    }
    SUBCASE("hidden prompt still on canvas") {
      s.prompt_history[1].visible = false;
      CHECK_FALSE(validate_session(s).empty());
    }
    SUBCASE("suggestion count") {
      s.suggestions->suggestions.pop_back();
      CHECK_FALSE(validate_session(s).empty());
    }
    SUBCASE("text embedding on an image") {
      s.batches[0].images[0].embedding->modality = Modality::text;
      CHECK_FALSE(validate_session(s).empty());
    }
  }

  TEST_CASE("session sink collects transcript entries") {
    Session s = create_session();
    auto sink = session_sink(s);
    sink({"ideate", "m", 0.7, {}, "r", ""});
    CHECK(s.transcripts.size() == 1);
  }
}
