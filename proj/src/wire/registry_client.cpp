// SPDX-License-Identifier: Apache-2.0

#include "mnsm/wire/registry_client.hpp"

#include <algorithm>

namespace mnsm::wire {

RegistryClient::RegistryClient(Endpoint registry, std::string self,
                               Duration liveness_interval, Duration request_timeout)
    : registry_(std::move(registry)),
      self_(std::move(self)),
      interval_(liveness_interval),
      timeout_(request_timeout) {
  reconnector_ = std::thread([this] { reconnect_loop(); });
}

RegistryClient::~RegistryClient() {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    s = std::move(session_);
  }
  cv_.notify_all();
  if (reconnector_.joinable()) reconnector_.join();
  if (s) s->close();
}

bool RegistryClient::connected() const {
  std::lock_guard lock(mu_);
  return session_ != nullptr;
}

std::uint64_t RegistryClient::generation() const {
  std::lock_guard lock(mu_);
  return generation_;
}

std::uint64_t RegistryClient::reregistrations() const {
  std::lock_guard lock(mu_);
  return reregistrations_;
}

std::shared_ptr<Session> RegistryClient::ensure_session(std::unique_lock<std::mutex>& lock) {
  if (session_) return session_;
  lock.unlock();
  std::shared_ptr<Session> fresh;
  try {
    fresh = Session::open(registry_, SessionOptions{self_, interval_}, timeout_);
  } catch (const ConnectError& e) {
    lock.lock();
    throw RegistryUnreachable(std::string("registry ") + registry_.str() + ": " + e.what());
  }
  lock.lock();
  if (session_) {  // lost a race with another caller
    fresh->close();
    return session_;
  }
  session_ = fresh;
  std::weak_ptr<Session> weak = fresh;
  fresh->start(
      [this](const WireMessage& msg) {
        if (msg.type != MessageType::LOOKUP_REPLY && msg.type != MessageType::LIST_REPLY) return;
        std::shared_ptr<std::promise<WireMessage>> p;
        {
          std::lock_guard lk(mu_);
          if (pending_.empty()) return;
          p = std::move(pending_.front());
          pending_.pop_front();
        }
        p->set_value(msg);
      },
      [this, weak](CloseReason) {
        if (auto s = weak.lock()) on_close(s);
      });
  return fresh;
}

void RegistryClient::on_close(const std::shared_ptr<Session>& which) {
  std::deque<std::shared_ptr<std::promise<WireMessage>>> failed;
  {
    std::lock_guard lock(mu_);
    if (session_ != which) return;
    session_.reset();
    failed.swap(pending_);
  }
  for (auto& p : failed) {
    p->set_exception(std::make_exception_ptr(RegistryUnreachable("registry session lost")));
  }
  cv_.notify_all();
}

WireMessage RegistryClient::request(WireMessage msg) {
  auto promise = std::make_shared<std::promise<WireMessage>>();
  auto future = promise->get_future();
  {
    std::unique_lock lock(mu_);
    auto s = ensure_session(lock);
    pending_.push_back(promise);
    if (!s->send(std::move(msg))) {
      pending_.erase(std::find(pending_.begin(), pending_.end(), promise));
      throw RegistryUnreachable("registry session closed");
    }
  }
  if (future.wait_for(timeout_) != std::future_status::ready) {
    throw RegistryUnreachable("registry request timed out");
  }
  return future.get();
}

std::uint64_t RegistryClient::register_service(ServiceKind kind, Endpoint address) {
  if (!valid_service_name(self_)) {
    throw std::invalid_argument("malformed service name '" + self_ + "'");
  }
  auto reply = request(make_register(self_, std::string(to_string(kind)), address.host,
                                     address.port));
  if (!reply.payload.value("found", false)) {
    throw std::invalid_argument(reply.str("error"));
  }
  auto rec = ServiceRecord::from_json(reply.payload.at("record"));
  std::lock_guard lock(mu_);
  registration_ = Registration{kind, address};
  generation_ = rec.generation;
  return rec.generation;
}

std::optional<ServiceRecord> RegistryClient::lookup(const std::string& name) {
  auto reply = request(make_lookup(self_, name));
  if (!reply.payload.value("found", false)) return std::nullopt;
  return ServiceRecord::from_json(reply.payload.at("record"));
}

std::vector<ServiceRecord> RegistryClient::list(std::optional<ServiceKind> kind) {
  std::optional<std::string> k;
  if (kind) k = std::string(to_string(*kind));
  auto reply = request(make_list(self_, k));
  std::vector<ServiceRecord> out;
  for (const auto& r : reply.payload.at("records")) out.push_back(ServiceRecord::from_json(r));
  return out;
}

void RegistryClient::deregister() {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    registration_.reset();
    s = std::move(session_);
  }
  if (s) s->close();
}

void RegistryClient::reconnect_loop() {
  Duration backoff{100};
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (session_ || !registration_) {
      cv_.wait_for(lock, interval_);
      continue;
    }
    auto reg = *registration_;
    lock.unlock();
    bool ok = false;
    try {
      auto reply = request(
          make_register(self_, std::string(to_string(reg.kind)), reg.address.host, reg.address.port));
      if (reply.payload.value("found", false)) {
        auto rec = ServiceRecord::from_json(reply.payload.at("record"));
        std::lock_guard lk(mu_);
        generation_ = rec.generation;
        ++reregistrations_;
        ok = true;
      }
    } catch (const std::exception&) {
    }
    lock.lock();
    if (ok) {
      backoff = Duration(100);
    } else {
      cv_.wait_for(lock, backoff);
      backoff = std::min(backoff * 2, Duration(2000));
    }
  }
}

}  // namespace mnsm::wire
