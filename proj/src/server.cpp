#include "workbench/server.hpp"

#include <httplib.h>

#include <functional>
#include <iostream>

#include "workbench/errors.hpp"
#include "workbench/service.hpp"

namespace workbench {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message,
                json extra = json::object()) {
  extra["error"] = message;
  extra["kind"] = kind;
  send_json(res, status, extra);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);  // json::parse_error becomes a 400 below
  if (!j.is_object()) throw InputError("request body must be a JSON object");
  return j;
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string()) {
    throw InputError(std::string("missing string field '") + key + "'");
  }
  return body.at(key).get<std::string>();
}

// Maps the library's exception types onto HTTP statuses.
void guarded(httplib::Response& res, const std::function<void()>& handler) {
  try {
    handler();
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const InputError& e) {
    send_error(res, 400, "input", e.what());
  } catch (const ContractViolation& e) {
    send_error(res, 400, "contract", e.what());
  } catch (const LookupError& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const SuggestionError& e) {
    send_error(res, 502, "suggestion", e.what(), {{"raw_response", e.raw_response()}});
  } catch (const IntegrationError& e) {
    send_error(res, 502, "integration", e.what());
  } catch (const ProviderError& e) {
    send_error(res, 502, "provider", e.what(), {{"attempts", e.attempts()}});
  } catch (const GenerationError& e) {
    send_error(res, 502, "generation", e.what());
  } catch (const FormatError& e) {
    send_error(res, 500, "format", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

void register_routes(httplib::Server& server, Workbench& wb) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      std::optional<std::uint64_t> seed;
      if (body.contains("layout_seed")) seed = body.at("layout_seed").get<std::uint64_t>();
      send_json(res, 201, wb.create_session(seed));
    });
  });

  server.Get(R"(/sessions/([^/]+))", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, wb.summary(req.matches[1])); });
  });

  server.Post(R"(/sessions/([^/]+)/ideate)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, wb.ideate(req.matches[1], required_string(parse_body(req), "subject"))); });
  });

  server.Post(R"(/sessions/([^/]+)/steer)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      send_json(res, 200, wb.steer(req.matches[1], required_string(parse_body(req), "instruction")));
    });
  });

  server.Post(R"(/sessions/([^/]+)/extend-style)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      std::optional<std::size_t> index;
      if (body.contains("subject_index")) index = body.at("subject_index").get<std::size_t>();
      send_json(res, 200,
                wb.extend_style(req.matches[1], index, required_string(body, "atomic_style"),
                                body.value("subject", "")));
    });
  });

  server.Post(R"(/sessions/([^/]+)/generate)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 202, wb.start_generation(req.matches[1], parse_body(req))); });
  });

  server.Get(R"(/sessions/([^/]+)/jobs/([^/]+))", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, wb.job(req.matches[1], req.matches[2])); });
  });

  server.Get(R"(/sessions/([^/]+)/layout)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<double> scale;
      if (req.has_param("scale")) {
        const std::string text = req.get_param_value("scale");
        std::size_t used = 0;
        try {
          scale = std::stod(text, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != text.size() || text.empty()) throw InputError("scale is not a number: " + text);
      }
      send_json(res, 200, wb.layout(req.matches[1], scale));
    });
  });

  server.Get(R"(/sessions/([^/]+)/images/([^/]+)\.png)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<int> size;
      if (req.has_param("size")) {
        const std::string text = req.get_param_value("size");
        if (text.empty() || text.size() > 6 || text.find_first_not_of("0123456789") != std::string::npos) {
          throw InputError("size is not a positive integer: " + text);
        }
        size = std::stoi(text);
      }
      const auto png = wb.image_png(req.matches[1], req.matches[2], size);
      res.status = 200;
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
  });

  server.Get(R"(/sessions/([^/]+)/images/([^/]+)/menu)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, wb.menu(req.matches[1], req.matches[2])); });
  });

  server.Post(R"(/sessions/([^/]+)/integrate)", [&wb](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const std::string modifier = required_string(body, "modifier");
      const std::string prompt = body.value("prompt", "");
      try {
        send_json(res, 200, wb.integrate(req.matches[1], modifier, prompt, body.value("allow_fallback", false)));
      } catch (const IntegrationError& e) {
        // Offer the naive merge so the client can apply it with a warning.
        const std::string base = prompt.empty() ? wb.snapshot(req.matches[1]).current_prompt : prompt;
        send_error(res, 502, "integration", e.what(), {{"fallback", naive_integrate(base, modifier)}});
      }
    });
  });

  server.Post(R"(/sessions/([^/]+)/prompts/([^/]+)/visible)",
              [&wb](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const json body = parse_body(req);
                  if (!body.contains("visible") || !body.at("visible").is_boolean()) {
                    throw InputError("missing boolean field 'visible'");
                  }
                  send_json(res, 200, wb.set_visible(req.matches[1], req.matches[2], body.at("visible").get<bool>()));
                });
              });
}

bool serve(Workbench& workbench, const std::string& host, int port) {
  httplib::Server server;
  register_routes(server, workbench);
  std::clog << "listening on http://" << host << ':' << port << '\n';
  return server.listen(host, port);
}

}  // namespace workbench
