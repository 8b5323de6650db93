// Headless entry point: corpus tools, every session API call, the offline
// end-to-end pipeline, and the HTTP server.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "workbench/config.hpp"
#include "workbench/corpus.hpp"
#include "workbench/errors.hpp"
#include "workbench/layout.hpp"
#include "workbench/server.hpp"
#include "workbench/service.hpp"
#include "workbench/session.hpp"
#include "workbench/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace workbench;

namespace {

struct Globals {
  std::string config_path;
  std::string store;
};

Config load_config(const Globals& g) {
  Config c = g.config_path.empty() ? Config::defaults() : Config::load(g.config_path);
  if (!g.store.empty()) c.session_store = g.store;
  return c;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

int corpus_ingest(const Globals& g, const std::string& in_path, const std::string& out_path, double nsfw,
                  std::size_t min_segments) {
  const Config config = load_config(g);
  const auto embedder = make_embedding_provider(config.embedding);
  std::ifstream in(in_path);
  if (!in) throw InputError("cannot open " + in_path);
  const auto parsed = read_prompt_jsonl(in);
  const auto report = ingest(parsed.records, *embedder, FilterConfig{nsfw, min_segments});
  save_corpus(report.corpus, out_path);
  print({{"input", report.input_count + parsed.malformed},
         {"unparsable_lines", parsed.malformed},
         {"malformed_records", report.malformed},
         {"survivors", report.survivors},
         {"provider", embedder->id()},
         {"out", out_path}});
  return 0;
}

int corpus_query(const Globals& g, const std::string& corpus_path, const std::string& text, std::size_t k) {
  const Config config = load_config(g);
  const auto embedder = make_embedding_provider(config.embedding);
  const auto loaded = load_corpus(corpus_path, embedder->id());
  for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
  json hits = json::array();
  for (const auto& n : loaded.corpus.knn(embedder->embed_text(text), k)) {
    hits.push_back({{"id", n.id}, {"similarity", n.similarity}, {"text", loaded.corpus.find(n.id)->text}});
  }
  print(hits);
  return 0;
}

int layout_export(const std::string& dir, double scale, const std::string& out) {
  const Session s = load_session(dir);
  CanvasLayout layout = s.current_layout.value_or(CanvasLayout{});
  const json j = layout_export_json(apply_scale(layout, scale).layout);
  if (out.empty()) {
    print(j);
  } else {
    write_file_atomic(out, j.dump(2));
  }
  return 0;
}

struct PipelineArgs {
  std::string subject;
  std::string style;
  std::string instruction;
  int batch = 10;
  std::uint64_t seed = 7;
  std::string out;
};

int pipeline_run(const Globals& g, const PipelineArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  Config config = load_config(g);
  config.session_store.clear();
  Workbench wb(config);

  const std::string sid = wb.create_session(a.seed).at("id");
  json steps = json::object();
  steps["ideate"] = wb.ideate(sid, a.subject);
  if (!a.instruction.empty()) steps["steer"] = wb.steer(sid, a.instruction);
  steps["extend_style"] = wb.extend_style(sid, 0, a.style);
  steps["generate"] = wb.generate_now(sid, {{"batch_size", a.batch}, {"seed", a.seed}});

  const json layout = wb.layout(sid, 1.0);
  steps["layout"] = {{"images", layout.at("images").size()}, {"clusters", layout.at("clusters").size()}};
  if (!layout.at("images").empty()) {
    const std::string first = layout.at("images").at(0).at("id");
    const json menu = wb.menu(sid, first);
    steps["menu"] = menu;
    if (!menu.at("image_modifiers").empty()) {
      steps["integrate"] = wb.integrate(sid, menu.at("image_modifiers").at(0).at("phrase"));
    }
  }

  fs::create_directories(a.out);
  wb.save(sid, a.out);
  write_file_atomic(fs::path(a.out) / "layout.json", layout.dump(2));
  const auto problems = check_session_directory(a.out);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  print({{"session", sid},
         {"out", a.out},
         {"seconds", seconds},
         {"valid", problems.empty()},
         {"problems", problems},
         {"steps", steps}});
  return problems.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-writing workbench: corpus tools, session API, offline pipeline, HTTP server"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config selecting providers and data files");

  // corpus ----------------------------------------------------------------
  auto* corpus = app.add_subcommand("corpus", "Prompt corpus tools");
  corpus->require_subcommand(1);
  std::string in_path, out_path, corpus_path, query_text;
  double nsfw = 0.1;
  std::size_t min_segments = 6, k = 10;
  auto* ingest_cmd = corpus->add_subcommand("ingest", "Filter and embed a JSONL prompt file");
  ingest_cmd->add_option("--in", in_path, "JSONL with id, text, nsfw_score")->required();
  ingest_cmd->add_option("--out", out_path, "Corpus file to write (plus .vec sidecar)")->required();
  ingest_cmd->add_option("--nsfw", nsfw, "Drop records scoring above this")->capture_default_str();
  ingest_cmd->add_option("--min-segments", min_segments, "Drop records with fewer comma segments")
      ->capture_default_str();
  auto* query_cmd = corpus->add_subcommand("query", "Nearest prompts to a text");
  query_cmd->add_option("--corpus", corpus_path)->required();
  query_cmd->add_option("--text", query_text)->required();
  query_cmd->add_option("--k", k)->capture_default_str();

  // layout ----------------------------------------------------------------
  auto* layout_cmd = app.add_subcommand("layout", "Layout tools");
  layout_cmd->require_subcommand(1);
  std::string session_dir, layout_out;
  double scale = 1.0;
  auto* export_cmd = layout_cmd->add_subcommand("export", "Print the layout JSON of a saved session");
  export_cmd->add_option("--session", session_dir, "Session directory")->required();
  export_cmd->add_option("--scale", scale)->capture_default_str();
  export_cmd->add_option("--out", layout_out, "Write to a file instead of stdout");

  // session ---------------------------------------------------------------
  auto* session = app.add_subcommand("session", "Session API calls against a session store directory");
  session->require_subcommand(1);
  session->add_option("--store", g.store, "Session store directory")->required();
  std::string sid, text, style, prompt, negative, image, prompt_id, validate_dir;
  std::optional<std::size_t> subject_index;
  std::optional<std::uint64_t> seed;
  std::optional<double> layout_scale;
  std::optional<int> image_size;
  int batch = 1;
  bool visible = true, allow_fallback = false;

  auto* s_create = session->add_subcommand("create", "POST /sessions");
  s_create->add_option("--seed", seed, "Layout seed");
  auto* s_show = session->add_subcommand("show", "GET /sessions/{id}");
  auto* s_ideate = session->add_subcommand("ideate", "POST /sessions/{id}/ideate");
  s_ideate->add_option("--subject", text)->required();
  auto* s_steer = session->add_subcommand("steer", "POST /sessions/{id}/steer");
  s_steer->add_option("--instruction", text)->required();
  auto* s_style = session->add_subcommand("extend-style", "POST /sessions/{id}/extend-style");
  s_style->add_option("--style", style)->required();
  s_style->add_option("--subject-index", subject_index);
  s_style->add_option("--subject", text);
  auto* s_generate = session->add_subcommand("generate", "POST /sessions/{id}/generate (waits for the job)");
  s_generate->add_option("--prompt", prompt, "Defaults to the session's current prompt");
  s_generate->add_option("--negative", negative);
  s_generate->add_option("--batch", batch)->capture_default_str();
  s_generate->add_option("--seed", seed);
  auto* s_layout = session->add_subcommand("layout", "GET /sessions/{id}/layout");
  s_layout->add_option("--scale", layout_scale);
  auto* s_menu = session->add_subcommand("menu", "GET /sessions/{id}/images/{iid}/menu");
  s_menu->add_option("--image", image)->required();
  auto* s_image = session->add_subcommand("image", "GET /sessions/{id}/images/{iid}.png");
  s_image->add_option("--image", image)->required();
  s_image->add_option("--size", image_size);
  s_image->add_option("--out", out_path)->required();
  auto* s_integrate = session->add_subcommand("integrate", "POST /sessions/{id}/integrate");
  s_integrate->add_option("--modifier", text)->required();
  s_integrate->add_option("--prompt", prompt);
  s_integrate->add_flag("--allow-fallback", allow_fallback);
  auto* s_visible = session->add_subcommand("visible", "POST /sessions/{id}/prompts/{pid}/visible");
  s_visible->add_option("--prompt-id", prompt_id)->required();
  s_visible->add_option("--visible", visible)->required();
  for (auto* sub : {s_show, s_ideate, s_steer, s_style, s_generate, s_layout, s_menu, s_image, s_integrate,
                    s_visible}) {
    sub->add_option("--id", sid, "Session id")->required();
  }
  auto* s_validate = session->add_subcommand("validate", "Check a saved session directory");
  s_validate->add_option("--dir", validate_dir)->required();

  // pipeline --------------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "End-to-end workflow");
  pipeline->require_subcommand(1);
  PipelineArgs pa;
  auto* run_cmd = pipeline->add_subcommand("run", "subject -> suggestions -> style -> images -> layout -> menus");
  run_cmd->add_option("--subject", pa.subject)->required();
  run_cmd->add_option("--style", pa.style)->required();
  run_cmd->add_option("--steer", pa.instruction, "Optional steering instruction");
  run_cmd->add_option("--batch", pa.batch)->capture_default_str();
  run_cmd->add_option("--seed", pa.seed)->capture_default_str();
  run_cmd->add_option("--out", pa.out, "Session directory to write")->required();

  // serve -----------------------------------------------------------------
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--store", g.store, "Persist sessions under this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) return corpus_ingest(g, in_path, out_path, nsfw, min_segments);
    if (*query_cmd) return corpus_query(g, corpus_path, query_text, k);
    if (*export_cmd) return layout_export(session_dir, scale, layout_out);
    if (*run_cmd) return pipeline_run(g, pa);
    if (*s_validate) {
      const auto problems = check_session_directory(validate_dir);
      print({{"valid", problems.empty()}, {"problems", problems}});
      return problems.empty() ? 0 : 3;
    }
    if (*serve_cmd) {
      Workbench wb(load_config(g));
      return serve(wb, host, port) ? 0 : 1;
    }
    if (*session) {
      Workbench wb(load_config(g));
      if (*s_create) print(wb.create_session(seed));
      if (*s_show) print(wb.summary(sid));
      if (*s_ideate) print(wb.ideate(sid, text));
      if (*s_steer) print(wb.steer(sid, text));
      if (*s_style) print(wb.extend_style(sid, subject_index, style, text));
      if (*s_generate) {
        json body{{"batch_size", batch}, {"negative_prompt", negative}};
        if (!prompt.empty()) body["prompt"] = prompt;
        if (seed) body["seed"] = *seed;
        print(wb.generate_now(sid, body));
      }
      if (*s_layout) print(wb.layout(sid, layout_scale));
      if (*s_menu) print(wb.menu(sid, image));
      if (*s_image) write_file_atomic(out_path, wb.image_png(sid, image, image_size));
      if (*s_integrate) print(wb.integrate(sid, text, prompt, allow_fallback));
      if (*s_visible) print(wb.set_visible(sid, prompt_id, visible));
      return 0;
    }
  } catch (const SuggestionError& e) {
    std::cerr << "error: " << e.what() << "\nraw response:\n" << e.raw_response() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
