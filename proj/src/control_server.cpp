#include "hector/control_server.hpp"

#include "hector/json_codec.hpp"

namespace hector {

using nlohmann::json;
using namespace std::chrono_literals;

namespace {

json error_reply(const std::string& code, const std::string& message) {
  return json{{"ok", false}, {"error", code}, {"message", message}};
}

PipelineConfig config_from_request(const json& value, const PipelineConfig& fallback) {
  if (value.is_null()) return fallback;
  if (value.is_string()) return load_config_file(value.get<std::string>());
  if (!value.is_object()) throw ControlError("BadRequest", "config must be an object or a file path");
  // Fields absent from the request keep the fallback values.
  json merged = codec::config_to_json(fallback);
  merged.update(value);
  return codec::config_from_json(merged);
}

std::vector<ReviewEdit> edits_from_request(const json& value) {
  std::vector<ReviewEdit> edits;
  if (value.is_null()) return edits;
  if (!value.is_array()) throw ControlError("BadRequest", "edits must be an array");
  for (const auto& e : value) edits.push_back(codec::edit_from_json(e));
  return edits;
}

}  // namespace

json handle_control_request(SessionController& controller, const ControlDefaults& defaults,
                            const json& request) {
  try {
    if (!request.is_object() || !request.contains("cmd") || !request["cmd"].is_string()) {
      return error_reply("BadRequest", "request must be an object with a string 'cmd'");
    }
    const auto cmd = request["cmd"].get<std::string>();
    if (cmd == "start") {
      StartRequest start;
      start.source = request.value("source", defaults.source);
      start.model = request.value("model", defaults.model);
      start.config = config_from_request(request.value("config", json(nullptr)), defaults.config);
      if (request.contains("session_id")) start.session_id = request["session_id"].get<std::string>();
      const auto id = controller.start(start);
      return json{{"ok", true}, {"session", id}};
    }
    if (cmd == "stop") {
      return json{{"ok", true}, {"bundle", bundle_to_json(controller.stop())}};
    }
    if (cmd == "review_get") {
      return json{{"ok", true}, {"bundle", bundle_to_json(controller.review_get())}};
    }
    if (cmd == "review_submit") {
      const auto edits = edits_from_request(request.value("edits", json(nullptr)));
      std::vector<std::uint64_t> journal;
      if (request.contains("journal")) journal = request["journal"].get<std::vector<std::uint64_t>>();
      controller.submit_review(edits, journal);
      return json{{"ok", true}};
    }
    if (cmd == "status") {
      json reply{{"ok", true}, {"state", to_string(controller.state())}};
      if (auto id = controller.active_session(); !id.empty()) reply["session"] = id;
      return reply;
    }
    return error_reply("UnknownCommand", "unknown command '" + cmd + "'");
  } catch (const ControlError& e) {
    return error_reply(e.code(), e.what());
  } catch (const json::exception& e) {
    return error_reply("BadRequest", e.what());
  } catch (const DomainError& e) {
    return error_reply("BadRequest", e.what());
  }
}

std::string handle_control_line(SessionController& controller, const ControlDefaults& defaults,
                                const std::string& line) {
  json request = json::parse(line, nullptr, false);
  if (request.is_discarded()) return error_reply("BadRequest", "malformed JSON").dump();
  return handle_control_request(controller, defaults, request).dump();
}

ControlServer::ControlServer(SessionController& controller, ControlDefaults defaults,
                             const net::Endpoint& control, const net::Endpoint& events)
    : controller_(controller), defaults_(std::move(defaults)), control_(control), events_(events) {
  control_thread_ = std::thread([this] { accept_loop(control_, false); });
  event_thread_ = std::thread([this] { accept_loop(events_, true); });
}

ControlServer::~ControlServer() { stop(); }

void ControlServer::stop() {
  if (stopping_.exchange(true)) return;
  if (control_thread_.joinable()) control_thread_.join();
  if (event_thread_.joinable()) event_thread_.join();
  control_.close();
  events_.close();
  std::list<std::thread> connections;
  {
    std::lock_guard lock(threads_mu_);
    connections.swap(connections_);
  }
  for (auto& t : connections) t.join();
}

void ControlServer::accept_loop(net::Listener& listener, bool event_stream) {
  while (!stopping_.load()) {
    auto sock = listener.accept(200ms);
    if (!sock) continue;
    std::lock_guard lock(threads_mu_);
    connections_.emplace_back([this, event_stream, s = std::move(*sock)]() mutable {
      if (event_stream) {
        serve_events(std::move(s));
      } else {
        serve_control(std::move(s));
      }
    });
  }
}

void ControlServer::serve_control(net::Socket sock) {
  net::LineReader reader(sock);
  while (!stopping_.load()) {
    std::optional<std::string> line;
    try {
      line = reader.next(net::Clock::now() + 200ms);
    } catch (const net::TimeoutError&) {
      continue;
    } catch (const net::NetError&) {
      return;
    }
    if (!line) return;
    if (line->empty()) continue;
    try {
      sock.send_all(handle_control_line(controller_, defaults_, *line) + "\n",
                    net::Clock::now() + 5s);
    } catch (const net::NetError&) {
      return;
    }
  }
}

void ControlServer::serve_events(net::Socket sock) {
  auto sub = controller_.events().subscribe();
  try {
    sock.send_all(lifecycle_line(controller_.state(), controller_.active_session()) + "\n",
                  net::Clock::now() + 1s);
    while (!stopping_.load()) {
      auto line = sub->pop(200ms);
      if (!line) continue;
      // A subscriber that cannot keep up is cut off rather than waited for.
      sock.send_all(*line + "\n", net::Clock::now() + 1s);
    }
  } catch (const net::NetError&) {
  }
}

}  // namespace hector
