// SPDX-License-Identifier: Apache-2.0

#include "mnsm/manager/manager.hpp"

#include <iostream>

namespace mnsm::manager {

namespace {

constexpr std::size_t kLogTail = 1000;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(NodeQuery q) {
  switch (q) {
    case NodeQuery::ok: return "ok";
    case NodeQuery::unknown_node: return "unknown node";
    case NodeQuery::not_connected: return "node not connected";
    case NodeQuery::timed_out: return "daemon did not answer";
  }
  return "?";
}

Manager::Manager(ManagerOptions options)
    : options_(std::move(options)),
      core_(options_.config),
      display_(options_.display_backlog) {
  if (auto reasons = options_.config.validate(); !reasons.empty()) {
    std::string joined;
    for (const auto& r : reasons) joined += (joined.empty() ? "" : "; ") + r;
    throw std::invalid_argument("bad configuration: " + joined);
  }
  state_copy_ = core_.state();
  if (!options_.log_file.empty()) {
    log_out_.open(options_.log_file, std::ios::app);
    if (!log_out_) throw std::runtime_error("cannot open " + options_.log_file.string());
  }

  timers_ = std::make_unique<TimerService>([this](core::TimerKind kind, std::uint64_t gen) {
    submit(core::TimerFired{kind, gen});
  });
  listener_ = std::make_unique<wire::Listener>(options_.host, options_.port,
                                               [this](wire::Socket s) { on_accept(std::move(s)); });

  registry_ = std::make_unique<wire::RegistryClient>(options_.registry, options_.name,
                                                     options_.liveness);
  const auto deadline = wire::now_ms() + options_.register_deadline;
  for (;;) {
    try {
      registry_->register_service(wire::ServiceKind::manager,
                                  wire::Endpoint{options_.host, listener_->port()});
      break;
    } catch (const wire::RegistryUnreachable&) {
      if (wire::now_ms() >= deadline) {
        listener_->stop();
        timers_.reset();
        throw;
      }
      std::this_thread::sleep_for(wire::Duration(100));
    }
  }
  write_log("listening on " + options_.host + ":" +
            std::to_string(listener_->port()));
  consumer_ = std::thread([this] { consume(); });
}

Manager::~Manager() {
  stop();
  if (consumer_.joinable()) consumer_.join();
  listener_->stop();
  std::vector<std::shared_ptr<wire::Session>> sessions;
  {
    std::lock_guard lock(mu_);
    for (auto& [_, p] : peers_) sessions.push_back(p.session);
  }
  for (auto& s : sessions) s->close();
  timers_.reset();
  registry_->deregister();
  display_.shutdown();
}

void Manager::post(Item item) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(item));
  }
  cv_.notify_all();
}

void Manager::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
    queue_.push_back(Stop{});
  }
  cv_.notify_all();
}

void Manager::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return stopped_; });
}

std::future<void> Manager::submit(core::ManagerEvent event) {
  auto done = std::make_shared<std::promise<void>>();
  auto fut = done->get_future();
  post(Core{std::move(event), std::move(done)});
  return fut;
}

core::ManagerState Manager::state() const {
  std::lock_guard lock(mu_);
  return state_copy_;
}

std::vector<std::string> Manager::published() const {
  std::lock_guard lock(mu_);
  return published_;
}

std::vector<std::string> Manager::log_tail(std::size_t n) const {
  std::lock_guard lock(mu_);
  auto from = log_.size() > n ? log_.end() - static_cast<std::ptrdiff_t>(n) : log_.begin();
  return {from, log_.end()};
}

std::size_t Manager::controllers() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [_, p] : peers_) n += p.kind == "controller";
  return n;
}

void Manager::on_accept(wire::Socket socket) {
  auto session = wire::Session::adopt(std::move(socket),
                                      wire::SessionOptions{options_.name, options_.liveness});
  std::uint64_t id;
  {
    std::lock_guard lock(mu_);
    id = next_peer_++;
    peers_[id] = Peer{session, {}, {}};
  }
  session->start([this, id](const wire::WireMessage& m) { post(Inbound{id, m}); },
                 [this, id](wire::CloseReason) { post(Closed{id}); });
}

void Manager::consume() {
  for (;;) {
    Item item;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return !queue_.empty(); });
      item = std::move(queue_.front());
      queue_.pop_front();
    }
    if (std::holds_alternative<Stop>(item)) break;
    std::visit(Overloaded{
                   [&](Inbound& in) { handle(in); },
                   [&](Closed& c) { handle(c); },
                   [&](Core& c) {
                     ingest(c.event);
                     c.done->set_value();
                   },
                   [](Stop&) {},
               },
               item);
  }
  std::lock_guard lock(mu_);
  for (auto& item : queue_) {
    if (auto* c = std::get_if<Core>(&item)) c->done->set_value();
  }
  queue_.clear();
  stopped_ = true;
  cv_.notify_all();
}

void Manager::handle(Hello& h) {
  std::shared_ptr<wire::Session> session;
  std::shared_ptr<wire::Session> replaced;
  {
    std::lock_guard lock(mu_);
    auto it = peers_.find(h.id);
    if (it == peers_.end()) return;
    if (!it->second.kind.empty()) return;  // identifies once
    it->second.kind = h.kind;
    it->second.name = h.name;
    session = it->second.session;
    if (h.kind == "daemon") {
      if (auto d = daemons_.find(h.name); d != daemons_.end() && d->second != h.id) {
        replaced = peers_[d->second].session;
        peers_.erase(d->second);
      }
      daemons_[h.name] = h.id;
    }
  }
  if (h.kind == "daemon") {
    if (replaced) {
      write_log("node " + h.name + " reconnected over a live session; old session dropped");
      replaced->abort();
      ingest(core::NodeDisconnected{h.name});
    }
    ingest(core::NodeConnected{h.name});
  } else if (h.kind == "controller") {
    write_log("controller " + h.name + " connected");
    send_aggregate(*session, state().aggregate);
  } else {
    write_log("peer " + h.name + " identified with unknown kind '" + h.kind + "'");
  }
}

void Manager::handle(Inbound& in) {
  const auto& msg = in.msg;
  if (msg.type == wire::MessageType::REGISTER) {
    Hello h{in.id, msg.has("kind") ? msg.str("kind") : std::string(), msg.sender};
    handle(h);
    return;
  }
  Peer peer;
  {
    std::lock_guard lock(mu_);
    auto it = peers_.find(in.id);
    if (it == peers_.end()) return;
    peer = it->second;
  }
  if (peer.kind == "daemon") {
    if (msg.type == wire::MessageType::STATE_REPORT) {
      auto cls = core::parse_report_class(msg.str("class"));
      if (!cls) {
        write_log("node " + peer.name + ": report with unknown class '" + msg.str("class") +
                  "' dropped");
        return;
      }
      ingest(core::Report{peer.name, msg.str("state"), *cls,
                          msg.has("color") ? msg.str("color") : std::string(),
                          msg.has("detail") ? msg.str("detail") : std::string()});
    } else if (msg.type == wire::MessageType::COMMAND &&
               msg.str("name") == wire::kLogReply) {
      auto id = msg.payload.value("id", std::uint64_t{0});
      std::shared_ptr<std::promise<std::vector<std::string>>> waiter;
      {
        std::lock_guard lock(mu_);
        if (auto it = log_requests_.find(id); it != log_requests_.end()) {
          waiter = it->second;
          log_requests_.erase(it);
        }
      }
      if (waiter) {
        std::vector<std::string> lines;
        if (msg.payload.contains("lines") && msg.payload["lines"].is_array()) {
          for (const auto& l : msg.payload["lines"]) {
            if (l.is_string()) lines.push_back(l.get<std::string>());
          }
        }
        waiter->set_value(std::move(lines));
      }
    }
  } else if (peer.kind == "controller") {
    if (msg.type == wire::MessageType::COMMAND) {
      ingest(core::ControllerCommand{msg.str("name")});
    }
  }
}

void Manager::handle(Closed& c) {
  Peer peer;
  bool current_daemon = false;
  {
    std::lock_guard lock(mu_);
    auto it = peers_.find(c.id);
    if (it == peers_.end()) return;
    peer = it->second;
    peers_.erase(it);
    if (peer.kind == "daemon") {
      auto d = daemons_.find(peer.name);
      if (d != daemons_.end() && d->second == c.id) {
        daemons_.erase(d);
        current_daemon = true;
      }
    }
  }
  if (current_daemon) {
    ingest(core::NodeDisconnected{peer.name});
  } else if (peer.kind == "controller") {
    write_log("controller " + peer.name + " disconnected");
  }
}

void Manager::ingest(const core::ManagerEvent& event) {
  auto effects = core_.ingest(event);
  {
    std::lock_guard lock(mu_);
    state_copy_ = core_.state();
  }
  for (const auto& e : effects) execute(e);
}

void Manager::execute(const core::Effect& effect) {
  std::visit(
      Overloaded{
          [&](const core::SendToNode& s) {
            std::shared_ptr<wire::Session> session;
            {
              std::lock_guard lock(mu_);
              if (auto d = daemons_.find(s.node); d != daemons_.end()) {
                session = peers_[d->second].session;
              }
            }
            if (!session || !session->send(wire::make_command(options_.name, s.command))) {
              write_log(s.command + " to " + s.node + " not delivered: no session");
            }
          },
          [&](const core::SetTimer& t) { timers_->arm(t.kind, t.generation, t.timeout); },
          [&](const core::CancelTimer& t) { timers_->cancel(t.generation); },
          [&](const core::PublishAggregate& p) {
            std::vector<std::shared_ptr<wire::Session>> controllers;
            {
              std::lock_guard lock(mu_);
              published_.push_back(p.state);
              for (const auto& [_, peer] : peers_) {
                if (peer.kind == "controller") controllers.push_back(peer.session);
              }
            }
            for (auto& c : controllers) send_aggregate(*c, p.state);
          },
          [&](const core::Display& d) { display_.publish(d); },
          [&](const core::Log& l) { write_log(l.line); },
      },
      effect);
}

void Manager::send_aggregate(wire::Session& to, const std::string& state) {
  const bool error = state == core::kError;
  to.send(wire::make_state_report(options_.name, state, error ? "error" : "major", ""));
}

void Manager::write_log(const std::string& line) {
  std::lock_guard lock(mu_);
  log_.push_back(line);
  if (log_.size() > kLogTail) log_.pop_front();
  if (log_out_) log_out_ << line << '\n' << std::flush;
  if (options_.echo_log) std::cerr << options_.name << ": " << line << '\n';
}

NodeQuery Manager::node_log(const std::string& node, std::size_t lines,
                            std::vector<std::string>& out, wire::Duration timeout) {
  std::shared_ptr<wire::Session> session;
  std::uint64_t id;
  auto waiter = std::make_shared<std::promise<std::vector<std::string>>>();
  auto fut = waiter->get_future();
  {
    std::lock_guard lock(mu_);
    if (!state_copy_.nodes.count(node)) return NodeQuery::unknown_node;
    auto d = daemons_.find(node);
    if (d == daemons_.end()) return NodeQuery::not_connected;
    session = peers_[d->second].session;
    id = next_request_++;
    log_requests_[id] = waiter;
  }
  auto msg = wire::make_command(options_.name, std::string(wire::kLogRequest));
  msg.payload["id"] = id;
  msg.payload["lines"] = lines;
  bool sent = session->send(std::move(msg));
  if (sent && fut.wait_for(timeout) == std::future_status::ready) {
    out = fut.get();
    return NodeQuery::ok;
  }
  std::lock_guard lock(mu_);
  log_requests_.erase(id);
  return sent ? NodeQuery::timed_out : NodeQuery::not_connected;
}

}  // namespace mnsm::manager
