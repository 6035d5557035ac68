#pragma once

#include <nlohmann/json.hpp>

#include "tcpsync/network.hpp"
#include "tcpsync/protocols.hpp"

namespace tcpsync {

// Model-unit JSON forms (packets, seconds, packets/second). Unknown keys are
// rejected so that typos in configuration files surface as errors.
nlohmann::json to_json(const ProtocolSpec& spec);
ProtocolSpec protocol_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NetworkParams& net);
NetworkParams network_from_json(const nlohmann::json& j);

// Throws std::invalid_argument naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* context);

}  // namespace tcpsync
