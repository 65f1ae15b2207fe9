// SPDX-License-Identifier: Apache-2.0

#include "mnsm/node/daemon.hpp"

#include <algorithm>


namespace mnsm::node {

using machine::Trigger;

namespace {

std::filesystem::path scratch_for(const DaemonOptions& o) {
  return o.log_dir / (o.name + ".scratch");
}

}  // namespace

Daemon::Daemon(DaemonOptions options)
    : options_(std::move(options)),
      log_(std::make_shared<LogFile>(options_.log_dir / (options_.name + ".log"))),
      core_(options_.spec),
      process_(
          ManagedProcess::Options{options_.exec, log_, options_.kill_grace, scratch_for(options_)},
          [this](std::uint64_t gen, std::string name) { post(ChildEvent{gen, std::move(name)}); },
          [this](std::uint64_t gen, int code) { post(ChildExit{gen, code}); }),
      registry_(options_.registry, options_.name, options_.liveness) {
  state_ = core_.state();
  connector_ = std::thread([this] { connector_loop(); });
}

Daemon::~Daemon() {
  stop();
  if (connector_.joinable()) connector_.join();
  process_.shutdown();
  std::shared_ptr<wire::Session> s;
  {
    std::lock_guard lock(mu_);
    s = std::move(session_);
  }
  if (s) s->close();
  registry_.deregister();
}

void Daemon::post(Item item) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(item));
  }
  cv_.notify_all();
}

void Daemon::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
    queue_.push_back(Stop{});
  }
  cv_.notify_all();
}

std::string Daemon::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

bool Daemon::connected() const {
  std::lock_guard lock(mu_);
  return session_ != nullptr;
}

void Daemon::note(const std::string& line) { log_->append("[mnsm] " + line); }

void Daemon::connector_loop() {
  wire::Duration backoff{100};
  bool registered = false;
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (session_) {
      cv_.wait(lock, [&] { return stopping_ || !session_; });
      continue;
    }
    lock.unlock();
    bool ok = false;
    try {
      if (!registered) {
        registry_.register_service(wire::ServiceKind::daemon, wire::Endpoint{options_.host, 0});
        registered = true;
      }
      if (auto record = registry_.lookup(options_.manager)) {
        auto session = wire::Session::open(record->address,
                                           wire::SessionOptions{options_.name, options_.liveness});
        std::uint64_t id = 0;
        {
          std::lock_guard lk(mu_);
          id = ++session_id_;
          session_ = session;
        }
        session->start([this, id](const wire::WireMessage& m) { on_session_message(id, m); },
                       [this, id](wire::CloseReason) { post(SessionLost{id}); });
        session->send(wire::make_register(options_.name, "daemon", options_.host, 0));
        ++sessions_opened_;
        post(SessionUp{id});
        ok = true;
      }
    } catch (const std::exception& e) {
      note(std::string("manager connection attempt failed: ") + e.what());
    }
    lock.lock();
    if (ok) {
      backoff = wire::Duration(100);
    } else {
      cv_.wait_for(lock, backoff, [&] { return stopping_; });
      backoff = std::min(backoff * 2, options_.max_backoff);
    }
  }
}

void Daemon::on_session_message(std::uint64_t session, const wire::WireMessage& msg) {
  if (msg.type != wire::MessageType::COMMAND) return;
  const auto name = msg.str("name");
  if (name == wire::kLogRequest) {
    // Served straight from the session thread: reading the log never
    // touches machine state.
    auto lines = static_cast<std::size_t>(std::max<std::int64_t>(0, msg.has("lines") ? msg.integer("lines") : 100));
    auto reply = wire::make_command(options_.name, std::string(wire::kLogReply));
    reply.payload["id"] = msg.payload.value("id", std::uint64_t{0});
    reply.payload["lines"] = log_->tail(lines);
    std::shared_ptr<wire::Session> s;
    {
      std::lock_guard lock(mu_);
      if (session == session_id_) s = session_;
    }
    if (s) s->send(std::move(reply));
    return;
  }
  post(Command{name, session});
}

void Daemon::send_report(const StateReport& r) {
  std::shared_ptr<wire::Session> s;
  {
    std::lock_guard lock(mu_);
    s = session_;
  }
  if (!s) return;  // dropped; the state is re-sent on the next session
  s->send(wire::make_state_report(options_.name, r.state, std::string(machine::to_string(r.cls)),
                                  r.color, r.detail));
}

void Daemon::apply(const Trigger& trigger) {
  auto step = core_.handle(trigger);
  note(step.log);
  bool shutdown = false;
  for (auto action : step.actions) {
    switch (action) {
      case machine::Action::start_process:
        if (auto gen = process_.start()) {
          child_generation_ = *gen;
        } else {
          note("start_process refused: previous child still running");
        }
        break;
      case machine::Action::kill_process:
        process_.kill();
        break;
      case machine::Action::cleanup:
        process_.cleanup();
        break;
      case machine::Action::shutdown:
        shutdown = true;
        break;
    }
  }
  {
    std::lock_guard lock(mu_);
    state_ = core_.state();
  }
  if (step.report) send_report(*step.report);
  if (shutdown) stop();
}

void Daemon::run() {
  for (;;) {
    Item item;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return !queue_.empty(); });
      item = std::move(queue_.front());
      queue_.pop_front();
    }
    if (std::holds_alternative<Stop>(item)) break;

    if (auto* c = std::get_if<Command>(&item)) {
      std::uint64_t current;
      {
        std::lock_guard lock(mu_);
        current = session_ ? session_id_ : 0;
      }
      if (c->session != current) continue;
      apply(Trigger::command(c->name));
    } else if (auto* e = std::get_if<ChildEvent>(&item)) {
      if (e->generation != child_generation_) {
        note("event " + e->name + " from a superseded child dropped");
        continue;
      }
      apply(Trigger::event(e->name));
    } else if (auto* x = std::get_if<ChildExit>(&item)) {
      if (x->generation != child_generation_) {
        note("exit " + std::to_string(x->code) + " of a superseded child dropped");
        continue;
      }
      child_generation_ = 0;
      apply(Trigger::exit(x->code));
    } else if (auto* up = std::get_if<SessionUp>(&item)) {
      std::uint64_t current;
      {
        std::lock_guard lock(mu_);
        current = session_ ? session_id_ : 0;
      }
      if (up->session != current) continue;
      note("connected to " + options_.manager);
      if (auto r = core_.current_report()) {
        send_report(*r);
        ++resends_;
      }
    } else if (auto* lost = std::get_if<SessionLost>(&item)) {
      std::shared_ptr<wire::Session> dead;
      {
        std::lock_guard lock(mu_);
        if (lost->session != session_id_ || !session_) continue;
        dead = std::move(session_);
      }
      cv_.notify_all();
      note("manager session lost");
      apply(Trigger::disconnect());
    }
  }

  // Shut down: stop the connector, take the child down, leave politely.
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (connector_.joinable()) connector_.join();
  process_.kill();
}

}  // namespace mnsm::node
