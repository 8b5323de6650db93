#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace workbench {

class Workbench;

// Routes (JSON unless noted):
//   POST /sessions
//   GET  /sessions/{id}
//   POST /sessions/{id}/ideate          {subject}
//   POST /sessions/{id}/steer           {instruction}
//   POST /sessions/{id}/extend-style    {subject_index?, subject?, atomic_style}
//   POST /sessions/{id}/generate        {prompt?, negative_prompt?, batch_size?, ...} -> {job_id}
//   GET  /sessions/{id}/jobs/{job}
//   GET  /sessions/{id}/layout?scale=s
//   GET  /sessions/{id}/images/{iid}.png?size=n   (image/png)
//   GET  /sessions/{id}/images/{iid}/menu
//   POST /sessions/{id}/integrate       {modifier, prompt?, allow_fallback?}
//   POST /sessions/{id}/prompts/{pid}/visible {visible}
void register_routes(httplib::Server& server, Workbench& workbench);

// Blocks until the server stops.
bool serve(Workbench& workbench, const std::string& host, int port);

}  // namespace workbench
