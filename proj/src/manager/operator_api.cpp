// SPDX-License-Identifier: Apache-2.0

#include "mnsm/manager/operator_api.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>

#include "mnsm/core/codec.hpp"
#include "mnsm/manager/manager.hpp"

namespace mnsm::manager {

using nlohmann::json;

namespace {

constexpr auto kApplyTimeout = std::chrono::seconds(5);
constexpr auto kStreamPoll = std::chrono::milliseconds(250);
constexpr std::size_t kMaxLogLines = 100000;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, json{{"error", message}});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    auto j = json::parse(req.body.empty() ? std::string("{}") : req.body);
    if (!j.is_object()) {
      fail(res, 400, "body must be a JSON object");
      return std::nullopt;
    }
    return j;
  } catch (const json::parse_error& e) {
    fail(res, 400, std::string("malformed JSON: ") + e.what());
    return std::nullopt;
  }
}

bool applied(std::future<void>& f) {
  return f.wait_for(kApplyTimeout) == std::future_status::ready;
}

json summary_json(const core::ManagerState& s) { return core::to_json(core::make_summary(s)); }

}  // namespace

OperatorApi::OperatorApi(Manager& manager, const std::string& host, int port)
    : manager_(manager), server_(std::make_unique<httplib::Server>()) {
  routes();
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw std::runtime_error("operator API cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
}

OperatorApi::~OperatorApi() { stop(); }

void OperatorApi::stop() {
  stopping_ = true;
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void OperatorApi::routes() {
  auto& srv = *server_;

  srv.Get("/nodes", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, manager_.display().snapshot().to_json());
  });

  srv.Get("/aggregate", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, summary_json(manager_.state()));
  });

  srv.Get("/config", [this](const httplib::Request&, httplib::Response& res) {
    auto s = manager_.state();
    auto j = core::to_json(s.next_config);
    j["in_force"] = core::to_json(s.config);
    reply(res, 200, j);
  });

  srv.Put("/config", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    core::ManagerConfig config;
    try {
      config = core::config_from_json(*body, manager_.state().next_config);
    } catch (const std::invalid_argument& e) {
      reply(res, 400, json{{"errors", json::array({e.what()})}});
      return;
    }
    if (auto reasons = config.validate(); !reasons.empty()) {
      reply(res, 400, json{{"errors", reasons}});
      return;
    }
    auto done = manager_.submit(core::ConfigChange{config});
    if (!applied(done)) return fail(res, 503, "manager busy");
    auto j = core::to_json(config);
    j["in_force"] = core::to_json(manager_.state().config);
    reply(res, 200, j);
  });

  srv.Post(R"(/nodes/([^/]+)/(kill|restart|clear-unavailable))",
           [this](const httplib::Request& req, httplib::Response& res) {
             const std::string node = req.matches[1];
             const std::string verb = req.matches[2];
             auto kind = core::parse_operator_action(verb);
             auto s = manager_.state();
             auto it = s.nodes.find(node);
             if (it == s.nodes.end()) return fail(res, 404, "unknown node " + node);
             if (kind != core::OperatorActionKind::clear_unavailable && !it->second.connected) {
               return fail(res, 409, "node " + node + " not connected");
             }
             auto done = manager_.submit(core::OperatorAction{*kind, node});
             if (!applied(done)) return fail(res, 503, "manager busy");
             auto after = manager_.state();
             reply(res, 200,
                   json{{"ok", true}, {"node", node}, {"action", verb},
                        {"last_action", after.last_action}});
           });

  srv.Get(R"(/nodes/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string node = req.matches[1];
    std::size_t lines = 100;
    if (req.has_param("lines")) {
      try {
        auto n = std::stoll(req.get_param_value("lines"));
        if (n < 1 || static_cast<std::size_t>(n) > kMaxLogLines) throw std::out_of_range("lines");
        lines = static_cast<std::size_t>(n);
      } catch (const std::exception&) {
        return fail(res, 400, "lines must be 1.." + std::to_string(kMaxLogLines));
      }
    }
    std::vector<std::string> out;
    switch (auto q = manager_.node_log(node, lines, out)) {
      case NodeQuery::ok:
        return reply(res, 200, json{{"node", node}, {"lines", out}});
      case NodeQuery::unknown_node:
        return fail(res, 404, std::string(to_string(q)));
      case NodeQuery::not_connected:
        return fail(res, 409, std::string(to_string(q)));
      case NodeQuery::timed_out:
        return fail(res, 504, std::string(to_string(q)));
    }
  });

  srv.Post("/command", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    if (!body->contains("name") || !(*body)["name"].is_string() ||
        (*body)["name"].get<std::string>().empty()) {
      return fail(res, 400, "missing command name");
    }
    auto done = manager_.submit(core::ControllerCommand{(*body)["name"].get<std::string>()});
    if (!applied(done)) return fail(res, 503, "manager busy");
    reply(res, 200, json{{"ok", true}, {"summary", summary_json(manager_.state())}});
  });

  srv.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    struct Cursor {
      bool started = false;
      std::uint64_t seq = 0;
    };
    auto cursor = std::make_shared<Cursor>();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) {
          auto emit = [&](const char* type, const json& j) {
            std::string frame = std::string("event: ") + type + "\ndata: " + j.dump() + "\n\n";
            return sink.write(frame.data(), frame.size());
          };
          if (stopping_) return false;
          if (!cursor->started) {
            auto snap = manager_.display().snapshot();
            cursor->started = true;
            cursor->seq = snap.seq;
            return emit("snapshot", snap.to_json());
          }
          auto records = manager_.display().since(cursor->seq, kStreamPoll);
          if (!records) {
            // Fell out of the backlog; the console reconnects and re-snapshots.
            emit("overflow", json{{"seq", cursor->seq}});
            sink.done();
            return false;
          }
          if (records->empty()) {
            static constexpr char ping[] = ": ping\n\n";
            return sink.write(ping, sizeof ping - 1);
          }
          for (const auto& r : *records) {
            if (!emit("update", r)) return false;
            cursor->seq = r["seq"].get<std::uint64_t>();
          }
          return true;
        });
  });
}

}  // namespace mnsm::manager
