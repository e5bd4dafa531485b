#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/core/types.hpp"
#include "evn/evalkit/experiment.hpp"
#include "evn/gateway/http_backend.hpp"

namespace evn::service {

/// Single JSON config file shared by the service and the CLI:
///
///   {"listen_address": "127.0.0.1", "port": 8080,
///    "backend": {"endpoint": "...", "model": "...", "api_key_env": "EVN_API_KEY"},
///    "mock_script": null, "data_dir": "evn-data",
///    "operators": {"elicitation_turns": 2, ...},
///    "parallelism": 4, "cors_origins": ["http://localhost:5173"]}
///
/// Every key is optional.
struct ServiceConfig {
    std::string listen_address = "127.0.0.1";
    int port = 8080;
    gateway::HttpBackendConfig backend;
    /// When set, every model call is served by the scripted mock instead.
    std::optional<std::string> mock_script;
    std::string data_dir = "evn-data";
    OperatorConfig operators;
    int parallelism = 4;
    std::vector<std::string> cors_origins;
};

void to_json(nlohmann::json& j, const ServiceConfig& v);
void from_json(const nlohmann::json& j, ServiceConfig& v);

/// Throws Error{FormatError} / Error{Io}; violations of parallelism >= 1 and
/// the operator-config invariants are reported as Error{InvalidArgument}.
ServiceConfig load_config(const std::string& path);
std::vector<std::string> check_config(const ServiceConfig& config);

/// Backend source for sessions and experiments: a fresh mock per call when a
/// mock script is configured, otherwise one shared HTTP client behind a
/// response cache persisted at <data_dir>/cache.jsonl.
evalkit::BackendFactory make_backend_factory(const ServiceConfig& config);

}  // namespace evn::service
