// SPDX-License-Identifier: Apache-2.0
//
// JSON forms of core events, effects and configuration. Used by the trace
// files, the replay tool and the operator API.

#pragma once

#include <json.hpp>

#include "mnsm/core/types.hpp"

namespace mnsm::core {

using nlohmann::json;

json to_json(const ManagerConfig& config);
/// Throws std::invalid_argument naming the offending field.
ManagerConfig config_from_json(const json& j, const ManagerConfig& base = {});

json to_json(const ManagerEvent& event);
ManagerEvent event_from_json(const json& j);

json to_json(const Effect& effect);
Effect effect_from_json(const json& j);

json to_json(const NodeTile& tile);
json to_json(const Summary& summary);

json effects_to_json(const Effects& effects);

}  // namespace mnsm::core
