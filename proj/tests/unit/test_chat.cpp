#include <doctest.h>

#include <json.hpp>

#include "support.hpp"
#include "workbench/chat.hpp"
#include "workbench/errors.hpp"
#include "workbench/suggestion.hpp"
#include "workbench/util.hpp"

using namespace workbench;
using namespace testsupport;

namespace {

ChatRequest sample_request(std::string task = "ideate") {
  return {std::move(task), {{"system", "be brief"}, {"user", "hello"}}, 0.7, {{"subject", "Lion"}}};
}

}  // namespace

TEST_SUITE("chat") {
  TEST_CASE("request key covers model, temperature and messages only") {
    const auto base = sample_request();
    const auto key = request_key("m", base);
    CHECK(key.size() == 16);
    auto other_context = base;
    other_context.context["subject"] = "Tiger";
    other_context.task = "steer";
    CHECK(request_key("m", other_context) == key);
    auto warmer = base;
    warmer.temperature = 0.8;
    CHECK(request_key("m", warmer) != key);
    auto longer = base;
    longer.messages.push_back({"assistant", "hi"});
    CHECK(request_key("m", longer) != key);
    CHECK(request_key("n", base) != key);
  }

  TEST_CASE("messages json round trip") {
    const std::vector<ChatMessage> msgs{{"system", "a"}, {"user", "b\nc"}};
    CHECK(messages_from_json(messages_to_json(msgs)) == msgs);
  }

  TEST_CASE("recorder output replays through the fixture provider") {
    TempDir dir;
    ScriptedChatProvider scripted([](const ChatRequest& r) { return "answer to " + r.messages.back().content; },
                                  "model-x");
    RecordingChatProvider recorder(scripted);
    const auto req = sample_request();
    const auto live = recorder.complete(req);
    CHECK(recorder.exchanges().size() == 1);
    CHECK(recorder.model_id() == "model-x");
    recorder.save(dir / "f.json");

    const auto fixture = FixtureChatProvider::load(dir / "f.json");
    CHECK(fixture.kind() == ChatProviderKind::transcript_fixture);
    CHECK(fixture.model_id() == "model-x");
    CHECK(fixture.size() == 1);
    CHECK(fixture.complete(req) == live);
    CHECK(fixture.complete(req) == live);
    auto unknown = req;
    unknown.messages.back().content = "something else";
    CHECK_THROWS_AS(fixture.complete(unknown), ProviderError);
  }

  TEST_CASE("fixture loading errors") {
    TempDir dir;
    write_file_atomic(dir / "bad.json", std::string_view("{not json"));
    CHECK_THROWS_AS(FixtureChatProvider::load(dir / "bad.json"), FormatError);
    write_file_atomic(dir / "future.json",
                      std::string_view(R"({"version":2,"model":"m","exchanges":[]})"));
    CHECK_THROWS_AS(FixtureChatProvider::load(dir / "future.json"), VersionError);
    write_file_atomic(dir / "partial.json", std::string_view(R"({"version":1,"model":"m","exchanges":[{"key":"k"}]})"));
    CHECK_THROWS_AS(FixtureChatProvider::load(dir / "partial.json"), FormatError);
    CHECK_THROWS_AS(FixtureChatProvider::load(dir / "absent.json"), FormatError);
  }

  TEST_CASE("committed worked-example fixture loads") {
    const auto fixture = FixtureChatProvider::load(fixture_path("worked_examples.v1.json"));
    CHECK(fixture.model_id() == "gpt-3.5-turbo");
    CHECK(fixture.size() == 6);
  }

  TEST_CASE("offline mock answers every task in a parseable shape") {
    MockChatProvider mock;
    const auto templates = PromptTemplates::load_default();
    const SuggestionEngine engine(mock, templates);
    const auto set = engine.ideate_subjects("lion");
    CHECK(set.suggestions.size() == 3);
    CHECK(set.suggestions[0].rfind("Lion ", 0) == 0);
    CHECK(engine.ideate_subjects("lion") == set);
    const auto steered = engine.steer_subjects(set, "Make it snowy.");
    CHECK(steered.suggestions[0].find(", make it snowy.") != std::string::npos);

    StubEmbeddingProvider stub;
    const auto style = engine.extend_style(sample_corpus(), stub, set.suggestions[0], "studio ghibli");
    CHECK(style.prompt.style_modifiers.size() >= 3);
    CHECK(style.prompt.style_modifiers[0] == "studio ghibli style");
    CHECK_FALSE(style.zero_shot);

    const auto merged = engine.integrate_modifier("a cat", "oil painting");
    CHECK(merged.prompt == "a cat, oil painting");
    CHECK(merged.path == IntegrationPath::provider);
    CHECK_THROWS_AS(mock.complete(sample_request("dance")), ProviderError);
  }

  TEST_CASE("mock style keeps the corpus spelling of modifiers") {
    MockChatProvider mock;
    ChatRequest r{"style", {}, 0.7,
                  {{"style", "studio ghibli"},
                   {"examples", "a fox, by Hayao Miyazaki, soft lighting\na cat, by hayao miyazaki, pastel colors\n"}}};
    const auto out = mock.complete(r);
    CHECK(out.rfind("studio ghibli style, by Hayao Miyazaki, ", 0) == 0);
    CHECK(out.find("hayao miyazaki") == std::string::npos);
  }
}
