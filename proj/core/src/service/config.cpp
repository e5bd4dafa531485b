#include "evn/service/config.hpp"

#include <filesystem>
#include <fstream>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/gateway/cache.hpp"
#include "evn/gateway/mock_backend.hpp"

namespace evn::service {

using nlohmann::json;

void to_json(json& j, const ServiceConfig& v) {
    j = {{"listen_address", v.listen_address},
         {"port", v.port},
         {"backend", v.backend},
         {"mock_script", v.mock_script ? json(*v.mock_script) : json(nullptr)},
         {"data_dir", v.data_dir},
         {"operators", v.operators},
         {"parallelism", v.parallelism},
         {"cors_origins", v.cors_origins}};
}

void from_json(const json& j, ServiceConfig& v) {
    if (!j.is_object()) throw Error(ErrorCode::FormatError, "config must be a JSON object");
    try {
        v.listen_address = j.value("listen_address", v.listen_address);
        v.port = j.value("port", v.port);
        if (j.contains("backend")) j["backend"].get_to(v.backend);
        if (const auto it = j.find("mock_script"); it != j.end() && !it->is_null()) v.mock_script = it->get<std::string>();
        v.data_dir = j.value("data_dir", v.data_dir);
        if (j.contains("operators")) j["operators"].get_to(v.operators);
        v.parallelism = j.value("parallelism", v.parallelism);
        v.cors_origins = j.value("cors_origins", v.cors_origins);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("invalid config: ") + e.what());
    }
}

std::vector<std::string> check_config(const ServiceConfig& c) {
    auto out = check_operator_config(c.operators);
    if (c.parallelism < 1) out.emplace_back("parallelism must be at least 1");
    if (c.port < 0 || c.port > 65535) out.emplace_back("port outside 0..65535");
    if (!c.mock_script && c.backend.endpoint.empty()) out.emplace_back("backend.endpoint is required without mock_script");
    return out;
}

ServiceConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path, {{"path", path}});
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::FormatError, "config file is not valid JSON: " + path, {{"path", path}});
    return doc.get<ServiceConfig>();
}

evalkit::BackendFactory make_backend_factory(const ServiceConfig& config) {
    if (config.mock_script) {
        auto script = std::make_shared<const gateway::MockScript>(gateway::MockScript::load(*config.mock_script));
        return [script]() -> gateway::BackendPtr { return std::make_shared<gateway::MockBackend>(script); };
    }
    if (config.backend.endpoint.empty())
        throw Error(ErrorCode::InvalidArgument, "no backend configured: set backend.endpoint or use a mock script");
    std::filesystem::create_directories(config.data_dir);
    auto cache = std::make_shared<gateway::CompletionCache>(
        (std::filesystem::path(config.data_dir) / "cache.jsonl").string());
    auto backend = gateway::cached(std::make_shared<gateway::HttpBackend>(config.backend), cache);
    return [backend] { return backend; };
}

}  // namespace evn::service
