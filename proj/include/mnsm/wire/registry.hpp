// SPDX-License-Identifier: Apache-2.0
//
// Central name service: services register under a unique name and are found
// by name, so no component needs a well-known address except the registry.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnsm/wire/session.hpp"

namespace mnsm::wire {

enum class ServiceKind { manager, daemon, controller };

std::string_view to_string(ServiceKind kind);
std::optional<ServiceKind> parse_service_kind(std::string_view text);

struct ServiceRecord {
  std::string name;
  ServiceKind kind = ServiceKind::daemon;
  Endpoint address;
  std::int64_t registered_at = 0;  // ms since the Unix epoch
  std::uint64_t generation = 0;

  nlohmann::json to_json() const;
  static ServiceRecord from_json(const nlohmann::json& j);
  bool operator==(const ServiceRecord&) const = default;
};

bool valid_service_name(std::string_view name);

/// The registry's table. Thread-safe. Generations count registrations of a
/// name over the table's lifetime and survive removal of the record.
class RegistryTable {
 public:
  using OwnerId = std::uint64_t;

  /// Inserts or replaces. Throws std::invalid_argument for a malformed name.
  std::uint64_t register_service(ServiceRecord record, OwnerId owner);
  std::optional<ServiceRecord> lookup(const std::string& name) const;
  std::vector<ServiceRecord> list(std::optional<ServiceKind> kind) const;
  /// Removes records still owned by `owner` (not ones since re-registered
  /// by someone else).
  void drop_owner(OwnerId owner);
  std::size_t size() const;

 private:
  struct Entry {
    ServiceRecord record;
    OwnerId owner;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> records_;
  std::map<std::string, std::uint64_t> generations_;
};

/// TCP front end for a RegistryTable. Each client connection is a Session;
/// when it dies, the records it registered disappear.
class RegistryServer {
 public:
  RegistryServer(const std::string& host, int port,
                 Duration liveness_interval = Duration(1000));
  ~RegistryServer();

  int port() const { return listener_->port(); }
  const RegistryTable& table() const { return table_; }
  void stop();

 private:
  void on_accept(Socket socket);
  void handle(const std::shared_ptr<Session>& session, RegistryTable::OwnerId owner,
              const WireMessage& msg);

  RegistryTable table_;
  Duration interval_;
  std::mutex mu_;
  std::map<RegistryTable::OwnerId, std::shared_ptr<Session>> sessions_;
  RegistryTable::OwnerId next_owner_ = 1;
  std::unique_ptr<Listener> listener_;
};

}  // namespace mnsm::wire
