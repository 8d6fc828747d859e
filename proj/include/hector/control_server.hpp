#pragma once

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "hector/controller.hpp"
#include "hector/net.hpp"

#include "json.hpp"

namespace hector {

/// Used by "start" for any field the request leaves out.
struct ControlDefaults {
  std::string source;
  PipelineConfig config;
  std::string model;
};

/// Executes one control request, e.g. {"cmd":"start","source":...}.
/// Replies {"ok":true,...} or {"ok":false,"error":<code>,"message":...}.
nlohmann::json handle_control_request(SessionController& controller, const ControlDefaults& defaults,
                                      const nlohmann::json& request);

/// Parses and answers one request line; malformed JSON yields an error reply.
std::string handle_control_line(SessionController& controller, const ControlDefaults& defaults,
                                const std::string& line);

/// Serves the control protocol and the event stream on two TCP listeners,
/// one newline-delimited JSON message per line.
class ControlServer {
 public:
  ControlServer(SessionController& controller, ControlDefaults defaults,
                const net::Endpoint& control, const net::Endpoint& events);
  ~ControlServer();

  std::uint16_t control_port() const { return control_.port(); }
  std::uint16_t event_port() const { return events_.port(); }
  void stop();

 private:
  void accept_loop(net::Listener& listener, bool event_stream);
  void serve_control(net::Socket sock);
  void serve_events(net::Socket sock);

  SessionController& controller_;
  ControlDefaults defaults_;
  net::Listener control_;
  net::Listener events_;
  std::atomic<bool> stopping_{false};
  std::mutex threads_mu_;
  std::list<std::thread> connections_;
  std::thread control_thread_;
  std::thread event_thread_;
};

}  // namespace hector
