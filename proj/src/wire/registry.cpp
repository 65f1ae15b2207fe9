// SPDX-License-Identifier: Apache-2.0

#include "mnsm/wire/registry.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <iostream>

namespace mnsm::wire {

std::string_view to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::manager: return "manager";
    case ServiceKind::daemon: return "daemon";
    case ServiceKind::controller: return "controller";
  }
  return "daemon";
}

std::optional<ServiceKind> parse_service_kind(std::string_view text) {
  if (text == "manager") return ServiceKind::manager;
  if (text == "daemon") return ServiceKind::daemon;
  if (text == "controller") return ServiceKind::controller;
  return std::nullopt;
}

nlohmann::json ServiceRecord::to_json() const {
  return {{"name", name},
          {"kind", to_string(kind)},
          {"host", address.host},
          {"port", address.port},
          {"registered_at", registered_at},
          {"generation", generation}};
}

ServiceRecord ServiceRecord::from_json(const nlohmann::json& j) {
  ServiceRecord r;
  r.name = j.at("name").get<std::string>();
  auto kind = parse_service_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown service kind");
  r.kind = *kind;
  r.address.host = j.at("host").get<std::string>();
  r.address.port = j.at("port").get<int>();
  r.registered_at = j.value("registered_at", std::int64_t{0});
  r.generation = j.value("generation", std::uint64_t{0});
  return r;
}

bool valid_service_name(std::string_view name) {
  return !name.empty() && name.size() <= 128 &&
         std::all_of(name.begin(), name.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                  c == '.';
         });
}

std::uint64_t RegistryTable::register_service(ServiceRecord record, OwnerId owner) {
  if (!valid_service_name(record.name)) {
    throw std::invalid_argument("malformed service name '" + record.name + "'");
  }
  std::lock_guard lock(mu_);
  record.generation = ++generations_[record.name];
  if (record.registered_at == 0) {
    record.registered_at = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
  }
  auto gen = record.generation;
  auto key = record.name;
  records_[key] = Entry{std::move(record), owner};
  return gen;
}

std::optional<ServiceRecord> RegistryTable::lookup(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(name);
  if (it == records_.end()) return std::nullopt;
  return it->second.record;
}

std::vector<ServiceRecord> RegistryTable::list(std::optional<ServiceKind> kind) const {
  std::lock_guard lock(mu_);
  std::vector<ServiceRecord> out;
  for (const auto& [name, entry] : records_) {
    if (!kind || entry.record.kind == *kind) out.push_back(entry.record);
  }
  return out;
}

void RegistryTable::drop_owner(OwnerId owner) {
  std::lock_guard lock(mu_);
  std::erase_if(records_, [&](const auto& kv) { return kv.second.owner == owner; });
}

std::size_t RegistryTable::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

RegistryServer::RegistryServer(const std::string& host, int port, Duration liveness_interval)
    : interval_(liveness_interval) {
  listener_ = std::make_unique<Listener>(host, port, [this](Socket s) { on_accept(std::move(s)); });
}

RegistryServer::~RegistryServer() { stop(); }

void RegistryServer::stop() {
  if (listener_) listener_->stop();
  std::map<RegistryTable::OwnerId, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  // Abrupt stop: clients must see the registry vanish, not a polite BYE.
  for (auto& [id, s] : sessions) s->abort();
}

void RegistryServer::on_accept(Socket socket) {
  auto session = Session::adopt(std::move(socket), SessionOptions{"registry", interval_});
  RegistryTable::OwnerId owner;
  {
    std::lock_guard lock(mu_);
    owner = next_owner_++;
    sessions_[owner] = session;
  }
  std::weak_ptr<Session> weak = session;
  session->start(
      [this, weak, owner](const WireMessage& msg) {
        if (auto s = weak.lock()) handle(s, owner, msg);
      },
      [this, owner](CloseReason) {
        table_.drop_owner(owner);
        std::shared_ptr<Session> doomed;
        std::lock_guard lock(mu_);
        auto it = sessions_.find(owner);
        if (it != sessions_.end()) {
          doomed = std::move(it->second);
          sessions_.erase(it);
        }
      });
}

void RegistryServer::handle(const std::shared_ptr<Session>& session,
                            RegistryTable::OwnerId owner, const WireMessage& msg) {
  using json = nlohmann::json;
  switch (msg.type) {
    case MessageType::REGISTER: {
      WireMessage reply{MessageType::LOOKUP_REPLY, {}, 0, json::object()};
      auto name = msg.has("name") ? msg.str("name") : msg.sender;
      reply.payload["name"] = name;
      auto kind = parse_service_kind(msg.str("kind"));
      try {
        if (!kind) throw std::invalid_argument("unknown kind '" + msg.str("kind") + "'");
        ServiceRecord rec{name, *kind, Endpoint{msg.str("host"), static_cast<int>(msg.integer("port"))},
                          0, 0};
        table_.register_service(std::move(rec), owner);
        reply.payload["found"] = true;
        reply.payload["record"] = table_.lookup(name)->to_json();
      } catch (const std::invalid_argument& e) {
        reply.payload["found"] = false;
        reply.payload["error"] = e.what();
      }
      session->send(std::move(reply));
      break;
    }
    case MessageType::LOOKUP: {
      WireMessage reply{MessageType::LOOKUP_REPLY, {}, 0, json::object()};
      reply.payload["name"] = msg.str("name");
      auto rec = table_.lookup(msg.str("name"));
      reply.payload["found"] = rec.has_value();
      if (rec) reply.payload["record"] = rec->to_json();
      session->send(std::move(reply));
      break;
    }
    case MessageType::LIST: {
      std::optional<ServiceKind> kind;
      if (msg.has("kind")) kind = parse_service_kind(msg.str("kind"));
      WireMessage reply{MessageType::LIST_REPLY, {}, 0, json::object()};
      reply.payload["records"] = json::array();
      for (const auto& r : table_.list(kind)) reply.payload["records"].push_back(r.to_json());
      session->send(std::move(reply));
      break;
    }
    default:
      std::cerr << "[registry] ignoring " << to_string(msg.type) << " from " << msg.sender
                << "\n";
  }
}

}  // namespace mnsm::wire
